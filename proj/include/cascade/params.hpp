#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cascade {

enum class ModelKind { stationary, nonstationary };

inline const char* to_string(ModelKind k) {
    return k == ModelKind::stationary ? "stationary" : "nonstationary";
}

/// Parameters of a log-normal continuous cascade.
///
/// A finite `integral_scale` T selects the classical stationary model;
/// an absent T selects the non-stationary model in which the current
/// time itself acts as the integral scale. `cutoff` is the smallest
/// resolved scale of the cascade and `sigma2` scales the measure so
/// that E[M(t)] = sigma2 * t.
///
/// lambda2 values >= 1 are accepted (the Gaussian field is well defined
/// for any lambda2 >= 0); operations that require finite second moments
/// of the measure check lambda2 < 1 themselves.
struct CascadeParams {
    double lambda2 = 0.0;
    std::optional<double> integral_scale{};
    double cutoff = 1.0;
    double sigma2 = 1.0;

    void validate() const {
        if (!(lambda2 >= 0.0)) throw std::invalid_argument("CascadeParams: lambda2 must be >= 0");
        if (!(cutoff > 0.0)) throw std::invalid_argument("CascadeParams: cutoff must be > 0");
        if (!(sigma2 > 0.0)) throw std::invalid_argument("CascadeParams: sigma2 must be > 0");
        if (integral_scale && !(*integral_scale >= cutoff))
            throw std::invalid_argument("CascadeParams: integral_scale must be >= cutoff");
    }

    bool stationary() const { return integral_scale.has_value(); }

    double require_integral_scale() const {
        if (!integral_scale)
            throw std::invalid_argument("CascadeParams: integral_scale is required for the stationary model");
        return *integral_scale;
    }
};

/// Uniform grid t_i = t0 + i*dt, i = 0..n-1.
struct TimeGrid {
    double t0 = 0.0;
    double dt = 1.0;
    std::size_t n = 0;

    void validate() const {
        if (!(t0 >= 0.0)) throw std::invalid_argument("TimeGrid: t0 must be >= 0");
        if (!(dt > 0.0)) throw std::invalid_argument("TimeGrid: dt must be > 0");
        if (n < 1) throw std::invalid_argument("TimeGrid: n must be >= 1");
    }

    double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
    double t_max() const { return time(n - 1); }

    bool operator==(const TimeGrid&) const = default;
};

/// Identifies the random stream a path was drawn from.
struct SeedRecord {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    bool operator==(const SeedRecord&) const = default;
};

/// A sampled realization of the log-volatility field omega on a grid.
struct GaussianLogVolPath {
    TimeGrid grid;
    std::vector<double> values;
    ModelKind kind = ModelKind::nonstationary;
    CascadeParams params;
    SeedRecord seed;
};

}  // namespace cascade
