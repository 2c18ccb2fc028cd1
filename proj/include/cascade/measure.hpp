#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cascade/params.hpp"
#include "cascade/rng.hpp"

namespace cascade {

/// Cumulative cascade measure on a grid.
///
/// increments[i] is the mass of [t_{i-1}, t_i] evaluated by the
/// left-endpoint rule, sigma2 * exp(omega_{i-1}) * dt, so increments[0]
/// is 0 and cumulative[i] = M(t_i) - M(t_0). The sigma2 factor makes
/// E[M(t)] = sigma2 * t.
struct MeasurePath {
    TimeGrid grid;
    std::vector<double> increments;
    std::vector<double> cumulative;
    CascadeParams params;
};

/// Random walk subordinated by a measure, X(t) = B[M(t)] with standard
/// Brownian B (H = 1/2 fixed). X(t_0) = 0.
struct MrwPath {
    TimeGrid grid;
    std::vector<double> values;
    double hurst = 0.5;
    CascadeParams params;
    SeedRecord seed;
};

/// Log-normal factor Omega_r of the stationary stochastic self-similarity
/// M_T(r t) =law r e^{Omega_r} M_T(t): variance -lambda2 ln r, mean
/// -variance/2.
struct SelfSimFactor {
    double ratio;
    double mean;
    double variance;

    SelfSimFactor(double r, double lambda2) {
        if (!(r > 0.0 && r <= 1.0))
            throw std::invalid_argument("SelfSimFactor: ratio must be in (0, 1]");
        ratio = r;
        variance = -lambda2 * std::log(r);
        mean = -0.5 * variance;
    }

    /// E[exp(q Omega_r)] = r^{-lambda2 (q^2 - q)/2}.
    double moment(double q) const { return std::exp(q * mean + 0.5 * q * q * variance); }
};

/// Scaling exponent of the stationary cascade,
///   zeta(q) = q (1 + lambda2/2) - lambda2 q^2 / 2.
/// zeta(1) = 1 (martingale normalization) and zeta(2) = 2 - lambda2.
inline double zeta(double q, double lambda2) {
    return q * (1.0 + 0.5 * lambda2) - 0.5 * lambda2 * q * q;
}

/// Integrate exp(omega) over the grid (left-endpoint rule, cutoff tied
/// to the grid step by the caller's choice of dt).
inline MeasurePath build_measure(const GaussianLogVolPath& path) {
    MeasurePath m;
    m.grid = path.grid;
    m.params = path.params;
    m.increments.assign(path.grid.n, 0.0);
    m.cumulative.assign(path.grid.n, 0.0);
    double total = 0.0;
    for (std::size_t i = 1; i < path.grid.n; ++i) {
        const double w = path.values[i - 1];
        if (!(std::abs(w) <= 700.0))
            throw std::runtime_error("build_measure: exp(omega) overflow at index " +
                                     std::to_string(i - 1) + " (omega=" + std::to_string(w) + ")");
        m.increments[i] = m.params.sigma2 * std::exp(w) * path.grid.dt;
        total += m.increments[i];
        m.cumulative[i] = total;
    }
    return m;
}

/// Brownian subordination: X increments are centered Gaussians with
/// variance equal to the measure increment, deterministic given the seed.
inline MrwPath build_mrw(const MeasurePath& m, std::uint64_t seed, std::uint64_t stream = 0) {
    auto rng = replica_rng(seed, stream);
    std::normal_distribution<double> normal(0.0, 1.0);
    MrwPath x;
    x.grid = m.grid;
    x.params = m.params;
    x.seed = SeedRecord{seed, stream};
    x.values.assign(m.grid.n, 0.0);
    for (std::size_t i = 1; i < m.grid.n; ++i)
        x.values[i] = x.values[i - 1] + std::sqrt(m.increments[i]) * normal(rng);
    return x;
}

}  // namespace cascade
