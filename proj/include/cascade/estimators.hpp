#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "cascade/measure.hpp"

namespace cascade {

/// Evenly spaced magnitude (log-volatility proxy) samples at step h.
struct MagnitudeSeries {
    double h = 1.0;
    double origin = 0.0;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double span() const { return static_cast<double>(values.size()) * h; }
};

/// Empirical magnitude covariance with its lag grid. `se` is empty when
/// the estimate comes from a single window.
struct CovarianceEstimate {
    std::vector<double> lags;  // n*h for n = 0..max_lag
    std::vector<double> values;
    std::vector<double> se;
    double delta_t = 0.0;  // window length the estimate was computed on
    std::size_t n_subsamples = 1;
};

/// Magnitude proxy omega_h ~ ln delta_h M: values[k] = ln(M(origin+(k+1)h) - M(origin+kh)).
/// h must be an integer multiple of the grid step.
inline MagnitudeSeries magnitude_from_measure(const MeasurePath& m, double h) {
    const double steps = h / m.grid.dt;
    const auto j = static_cast<std::size_t>(std::llround(steps));
    if (j < 1 || std::abs(steps - static_cast<double>(j)) > 1e-9)
        throw std::invalid_argument("magnitude_from_measure: h must be an integer multiple of dt");
    if (m.grid.n < j + 1)
        throw std::invalid_argument("magnitude_from_measure: series shorter than one span h");

    MagnitudeSeries s;
    s.h = h;
    s.origin = m.grid.t0;
    const std::size_t count = (m.grid.n - 1) / j;
    s.values.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double dm = m.cumulative[(k + 1) * j] - m.cumulative[k * j];
        if (!(dm > 0.0))
            throw std::runtime_error("magnitude_from_measure: non-positive measure increment at index " +
                                     std::to_string(k));
        s.values.push_back(std::log(dm));
    }
    return s;
}

/// The covariance estimator with the empirical mean of the full sample
/// removed:
///   C_hat(n) = (N-n)^-1 sum_{i=0}^{N-1-n} (x_i - mu_hat)(x_{i+n} - mu_hat).
inline CovarianceEstimate magnitude_covariance(const MagnitudeSeries& s, std::size_t max_lag_n) {
    const std::size_t N = s.values.size();
    if (N < 2) throw std::invalid_argument("magnitude_covariance: need at least 2 samples");
    if (max_lag_n >= N)
        throw std::invalid_argument("magnitude_covariance: max_lag_n must be < N");

    double mu = 0.0;
    for (double v : s.values) mu += v;
    mu /= static_cast<double>(N);

    CovarianceEstimate est;
    est.delta_t = s.span();
    est.n_subsamples = 1;
    for (std::size_t n = 0; n <= max_lag_n; ++n) {
        double acc = 0.0;
        for (std::size_t i = 0; i + n < N; ++i)
            acc += (s.values[i] - mu) * (s.values[i + n] - mu);
        est.lags.push_back(static_cast<double>(n) * s.h);
        est.values.push_back(acc / static_cast<double>(N - n));
    }
    return est;
}

/// Fig.-6 subsampling protocol: the series is cut into consecutive
/// disjoint windows of length delta_t (trailing remainder dropped), the
/// covariance estimator runs per window, and per-lag mean and standard
/// error across windows are returned. A single complete window reduces
/// to magnitude_covariance.
inline CovarianceEstimate subsampled_covariance(const MagnitudeSeries& s, double delta_t,
                                                std::size_t max_lag_n) {
    const double steps = delta_t / s.h;
    const auto n_sub = static_cast<std::size_t>(std::llround(steps));
    if (n_sub < 2 || std::abs(steps - static_cast<double>(n_sub)) > 1e-9)
        throw std::invalid_argument("subsampled_covariance: delta_t must be a multiple of h (>= 2h)");
    if (max_lag_n >= n_sub)
        throw std::invalid_argument("subsampled_covariance: max_lag_n must be < delta_t/h");
    const std::size_t windows = s.values.size() / n_sub;
    if (windows < 1)
        throw std::invalid_argument("subsampled_covariance: series shorter than one window");

    std::vector<std::vector<double>> per_window(windows);
    for (std::size_t w = 0; w < windows; ++w) {
        MagnitudeSeries window;
        window.h = s.h;
        window.origin = s.origin + static_cast<double>(w * n_sub) * s.h;
        window.values.assign(s.values.begin() + static_cast<std::ptrdiff_t>(w * n_sub),
                             s.values.begin() + static_cast<std::ptrdiff_t>((w + 1) * n_sub));
        per_window[w] = magnitude_covariance(window, max_lag_n).values;
    }

    CovarianceEstimate est;
    est.delta_t = delta_t;
    est.n_subsamples = windows;
    const double w = static_cast<double>(windows);
    for (std::size_t n = 0; n <= max_lag_n; ++n) {
        double mean = 0.0;
        for (const auto& win : per_window) mean += win[n];
        mean /= w;
        est.lags.push_back(static_cast<double>(n) * s.h);
        est.values.push_back(mean);
    }
    if (windows >= 2) {
        // Two-pass dispersion: identical windows report exactly zero.
        for (std::size_t n = 0; n <= max_lag_n; ++n) {
            double ss = 0.0;
            for (const auto& win : per_window) {
                const double d = win[n] - est.values[n];
                ss += d * d;
            }
            est.se.push_back(std::sqrt(ss / (w - 1.0) / w));
        }
    }
    return est;
}

/// Exact expectation of the covariance estimator on a stationary
/// Gaussian sequence with true covariance C(lag):
///   E[C_hat(n)] = C(n) + K(0) - 2 K(n),
///   K(n) = (N (N-n))^-1 sum_{i=0}^{N-n-1} sum_{j=0}^{N-1} C(|i-j|).
/// Precomputes prefix sums once so each K evaluation is O(1); the O(N^2)
/// double-sum reference lives in expected_bias_exact_quadratic.
class ExactBiasCalculator {
public:
    template <class CovFn>
    ExactBiasCalculator(CovFn&& cov, std::size_t N) : N_(N) {
        if (N < 1) throw std::invalid_argument("ExactBiasCalculator: N must be >= 1");
        c_.resize(N);
        for (std::size_t d = 0; d < N; ++d) c_[d] = cov(d);
        // P[k] = sum_{d=1..k} C(d); Q[k] = sum_{i=0..k} P[i].
        p_.assign(N, 0.0);
        q_.assign(N, 0.0);
        for (std::size_t k = 1; k < N; ++k) p_[k] = p_[k - 1] + c_[k];
        q_[0] = p_[0];
        for (std::size_t k = 1; k < N; ++k) q_[k] = q_[k - 1] + p_[k];
    }

    double k_sum(std::size_t n) const {
        if (n >= N_) throw std::invalid_argument("ExactBiasCalculator: n must be < N");
        const std::size_t m = N_ - n;  // rows of the double sum
        // sum_{i=0}^{m-1} [P(i) + P(N-1-i) + C(0)]
        double total = q_[m - 1] + (q_[N_ - 1] - (m == N_ ? 0.0 : q_[N_ - 1 - m])) +
                       static_cast<double>(m) * c_[0];
        return total / (static_cast<double>(N_) * static_cast<double>(m));
    }

    double expected(std::size_t n) const { return c_[n] + k_sum(0) - 2.0 * k_sum(n); }

private:
    std::size_t N_;
    std::vector<double> c_, p_, q_;
};

/// O(N) evaluation of E[C_hat(n)] via prefix sums.
template <class CovFn>
double expected_bias_exact(CovFn&& cov, std::size_t N, std::size_t n) {
    return ExactBiasCalculator(std::forward<CovFn>(cov), N).expected(n);
}

/// O(N^2) double-sum reference for the same quantity.
template <class CovFn>
double expected_bias_exact_quadratic(CovFn&& cov, std::size_t N, std::size_t n) {
    if (n >= N) throw std::invalid_argument("expected_bias_exact_quadratic: n must be < N");
    auto k_sum = [&](std::size_t lag) {
        double acc = 0.0;
        for (std::size_t i = 0; i + lag < N; ++i)
            for (std::size_t j = 0; j < N; ++j)
                acc += cov(i > j ? i - j : j - i);
        return acc / (static_cast<double>(N) * static_cast<double>(N - lag));
    };
    return cov(n) + k_sum(0) - 2.0 * k_sum(n);
}

/// First-order closed form for the expected estimator value on a window
/// of length delta_t when the true covariance is logarithmic with
/// integral scale T >> delta_t:
///   lambda2 * (ln(e^{-3/2} delta_t / tau) - tau/delta_t).
/// Notably T-independent: the apparent integral scale is e^{-3/2} delta_t.
inline double expected_cov_approx(double tau, double delta_t, double lambda2) {
    if (!(tau > 0.0) || !(tau < delta_t))
        throw std::invalid_argument("expected_cov_approx: requires 0 < tau < delta_t");
    return lambda2 * (std::log(std::exp(-1.5) * delta_t / tau) - tau / delta_t);
}

}  // namespace cascade
