#pragma once

#include <cstdint>
#include <random>

namespace cascade {

/// Engine for Monte-Carlo replica `stream` of master seed `seed`.
///
/// Streams derived from the same master seed with distinct stream
/// indices are independent for practical purposes, so replicas can be
/// evaluated concurrently and reduced in index order without touching
/// a shared engine.
inline std::mt19937_64 replica_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace cascade
