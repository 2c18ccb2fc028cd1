#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cascade/params.hpp"

namespace cascade {

/// Whether the cone-like domain attached to time t is non-empty.
/// For the non-stationary model the cone is empty below the cutoff and
/// omega(t) is deterministically 0 there; the stationary cone is never
/// empty.
inline bool cone_active(ModelKind kind, double t, const CascadeParams& p) {
    return kind == ModelKind::stationary || t >= p.cutoff;
}

/// Stationary covariance Cov[omega(t), omega(t+tau)] for integral scale T:
///   lambda2 * ln(T/tau)                      for cutoff <= tau <= T
///   lambda2 * (ln(T/cutoff) + 1 - tau/cutoff) for tau <= cutoff
///   0                                        for tau > T
/// Continuous across both branch boundaries.
inline double cov_stationary(double tau, const CascadeParams& p) {
    const double T = p.require_integral_scale();
    if (!(tau >= 0.0)) throw std::invalid_argument("cov_stationary: tau must be >= 0");
    if (tau > T) return 0.0;
    if (tau <= p.cutoff) return p.lambda2 * (std::log(T / p.cutoff) + 1.0 - tau / p.cutoff);
    return p.lambda2 * std::log(T / tau);
}

/// Mean of the stationary field, -(lambda2/2)(1 + ln(T/cutoff)),
/// the unique choice with E[exp(omega)] = 1.
inline double mean_stationary(const CascadeParams& p) {
    const double T = p.require_integral_scale();
    return -0.5 * p.lambda2 * (1.0 + std::log(T / p.cutoff));
}

/// Aging covariance Cov[omega(t1), omega(t2)] of the non-stationary field.
/// With t2 = max(t1, t2) and tau = |t2 - t1| this is the stationary kernel
/// with T replaced by t2; it vanishes whenever either cone is empty.
inline double cov_nonstationary(double t1, double t2, const CascadeParams& p) {
    if (!(t1 >= 0.0) || !(t2 >= 0.0))
        throw std::invalid_argument("cov_nonstationary: times must be >= 0");
    const double lo = std::min(t1, t2);
    const double hi = std::max(t1, t2);
    if (!cone_active(ModelKind::nonstationary, lo, p)) return 0.0;
    const double tau = hi - lo;
    if (tau <= p.cutoff) return p.lambda2 * (std::log(hi / p.cutoff) + 1.0 - tau / p.cutoff);
    return p.lambda2 * std::log(hi / tau);
}

/// Variance of the non-stationary field, lambda2 * (1 + ln(t/cutoff)),
/// 0 below the cutoff.
inline double var_nonstationary(double t, const CascadeParams& p) {
    return cov_nonstationary(t, t, p);
}

/// Mean of the non-stationary field at time t, -(1/2) Var[omega(t)].
/// Returns 0 for t below the cutoff where the field is degenerate.
inline double mean_nonstationary(double t, const CascadeParams& p) {
    if (!(t >= 0.0)) throw std::invalid_argument("mean_nonstationary: t must be >= 0");
    if (!cone_active(ModelKind::nonstationary, t, p)) return 0.0;
    return -0.5 * p.lambda2 * (1.0 + std::log(t / p.cutoff));
}

/// Kernel dispatch on the model kind. Stationary covariance depends on
/// the lag only.
inline double cov(ModelKind kind, double t1, double t2, const CascadeParams& p) {
    if (kind == ModelKind::stationary) return cov_stationary(std::abs(t2 - t1), p);
    return cov_nonstationary(t1, t2, p);
}

inline double mean(ModelKind kind, double t, const CascadeParams& p) {
    if (kind == ModelKind::stationary) return mean_stationary(p);
    return mean_nonstationary(t, p);
}

/// Stationary covariance of field increments over span h at lag tau:
///   Cov[delta_h omega(t), delta_h omega(t+tau)] = lambda2 * ln(1 - h^2/tau^2).
/// Always <= 0; this anti-correlation is the 1/f signature of the field.
/// Requires tau > h (the lag-h increments overlap otherwise and the
/// expression is undefined).
inline double increment_cov(double h, double tau, const CascadeParams& p) {
    if (!(h > 0.0)) throw std::invalid_argument("increment_cov: h must be > 0");
    if (!(tau > h)) throw std::domain_error("increment_cov: requires tau > h");
    return p.lambda2 * std::log(1.0 - (h * h) / (tau * tau));
}

/// Membership predicate of the cone-like time-scale domain.
/// Non-stationary: (u, s) in C(t)   <=> s >= cutoff, max(0, t-s) <= u <= t, t >= cutoff.
/// Stationary:     (u, s) in C_T(t) <=> s >= cutoff, t - min(s, T) <= u <= t.
inline bool cone_contains(ModelKind kind, double t, double u, double s, const CascadeParams& p) {
    if (s < p.cutoff) return false;
    if (kind == ModelKind::nonstationary) {
        if (t < p.cutoff) return false;
        return std::max(0.0, t - s) <= u && u <= t;
    }
    const double T = p.require_integral_scale();
    return t - std::min(s, T) <= u && u <= t;
}

}  // namespace cascade
