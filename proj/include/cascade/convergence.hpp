#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cascade/cone.hpp"
#include "cascade/measure.hpp"
#include "cascade/params.hpp"

namespace cascade {

struct ConvergencePair {
    double ell_coarse = 0.0;
    double ell_fine = 0.0;
    double msd = 0.0;  // E[(M_fine(t) - M_coarse(t))^2]
    double se = 0.0;
};

struct ConvergenceTable {
    std::vector<ConvergencePair> pairs;  // ordered coarse to fine
    std::vector<double> ratios;          // pairs[j].msd / pairs[j+1].msd, expected 2^(1-lambda2)
    std::vector<std::string> warnings;
};

/// Mean-square distance between the measures at successive cutoff
/// halvings, estimated from coupled samples: all cutoff levels share the
/// cone-discretization noise cells with s above the level, so the
/// difference M_ell - M_2ell is meaningful pathwise. The ratio of
/// consecutive pair msds estimates 2^(1-lambda2).
inline ConvergenceTable convergence_diagnostic(double horizon, std::vector<double> ell_list,
                                               const CascadeParams& params, std::size_t reps,
                                               std::uint64_t seed, int scale_resolution = 8) {
    params.validate();
    if (ell_list.size() < 2)
        throw std::invalid_argument("convergence_diagnostic: need at least two cutoff levels");
    for (std::size_t i = 0; i + 1 < ell_list.size(); ++i) {
        const double ratio = ell_list[i] / ell_list[i + 1];
        // Successive levels halve; a repeated level is allowed and its
        // pair msd is exactly zero by construction.
        if (!(ell_list[i] >= ell_list[i + 1]) ||
            (std::abs(ratio - 2.0) > 1e-9 && std::abs(ratio - 1.0) > 1e-9))
            throw std::invalid_argument(
                "convergence_diagnostic: successive cutoffs must be equal or halve");
    }
    if (!(horizon > ell_list.front()))
        throw std::invalid_argument("convergence_diagnostic: horizon must exceed the coarsest cutoff");

    ConvergenceTable table;
    if (reps < 100)
        table.warnings.push_back("fewer than 100 replicas; the msd estimates may be unstable");

    const double ell_min = ell_list.back();
    const double du = 0.5 * ell_min;
    TimeGrid grid{0.0, du, static_cast<std::size_t>(std::llround(horizon / du)) + 1};

    CascadeParams p = params;
    p.cutoff = ell_min;
    ConeSampler sampler(ModelKind::nonstationary, grid, p, scale_resolution, ell_list);

    const std::size_t n_pairs = ell_list.size() - 1;
    std::vector<double> sum(n_pairs, 0.0), sum_sq(n_pairs, 0.0);
    std::vector<double> mass(ell_list.size());
    for (std::size_t rep = 0; rep < reps; ++rep) {
        const auto paths = sampler.sample_all(seed, rep);
        for (std::size_t li = 0; li < paths.size(); ++li)
            mass[li] = build_measure(paths[li]).cumulative.back();
        for (std::size_t j = 0; j < n_pairs; ++j) {
            const double d2 = (mass[j + 1] - mass[j]) * (mass[j + 1] - mass[j]);
            sum[j] += d2;
            sum_sq[j] += d2 * d2;
        }
    }

    const double r = static_cast<double>(reps);
    for (std::size_t j = 0; j < n_pairs; ++j) {
        ConvergencePair pair;
        pair.ell_coarse = ell_list[j];
        pair.ell_fine = ell_list[j + 1];
        pair.msd = sum[j] / r;
        const double var = std::max(0.0, sum_sq[j] / r - pair.msd * pair.msd);
        pair.se = std::sqrt(var / r);
        table.pairs.push_back(pair);
    }
    for (std::size_t j = 0; j + 1 < n_pairs; ++j)
        table.ratios.push_back(table.pairs[j].msd / table.pairs[j + 1].msd);
    return table;
}

}  // namespace cascade
