#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cascade/estimators.hpp"

namespace cascade {

/// Result of regressing a covariance estimate against ln(tau):
/// lambda2_hat is minus the slope and T_hat = exp(intercept/lambda2_hat)
/// is the tau-axis crossing of the fitted line. Fits with non-positive
/// slope magnitude are flagged degenerate instead of throwing so scans
/// over many windows always complete.
struct ScalingFit {
    double lambda2_hat = 0.0;
    std::optional<double> T_hat{};
    std::optional<double> T_stderr{};
    double intercept = 0.0;
    double lag_lo = 0.0;
    double lag_hi = 0.0;
    std::size_t n_lags = 0;
    double residual_rms = 0.0;
    double var_slope = 0.0;
    double var_intercept = 0.0;
    double cov_slope_intercept = 0.0;
    bool weighted = false;
    bool degenerate = false;
};

/// Ordinary least squares of C_hat(tau) on ln(tau) over lags in
/// [lag_lo, lag_hi], weighted by 1/se^2 when per-lag standard errors are
/// available (and all positive in the range).
inline ScalingFit fit_log_decay(const CovarianceEstimate& c, double lag_lo, double lag_hi) {
    std::vector<double> x, y, w;
    const bool have_se = c.se.size() == c.values.size();
    bool use_weights = have_se;
    for (std::size_t i = 0; i < c.lags.size(); ++i) {
        const double lag = c.lags[i];
        if (lag <= 0.0 || lag < lag_lo * (1.0 - 1e-12) || lag > lag_hi * (1.0 + 1e-12)) continue;
        x.push_back(std::log(lag));
        y.push_back(c.values[i]);
        if (have_se) {
            if (!(c.se[i] > 0.0)) use_weights = false;
            w.push_back(c.se[i]);
        }
    }
    if (x.size() < 3)
        throw std::invalid_argument("fit_log_decay: need at least 3 lags in [lag_lo, lag_hi]");

    ScalingFit fit;
    fit.lag_lo = lag_lo;
    fit.lag_hi = lag_hi;
    fit.n_lags = x.size();
    fit.weighted = use_weights;

    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double wi = use_weights ? 1.0 / (w[i] * w[i]) : 1.0;
        sw += wi;
        sx += wi * x[i];
        sy += wi * y[i];
        sxx += wi * x[i] * x[i];
        sxy += wi * x[i] * y[i];
    }
    const double det = sw * sxx - sx * sx;
    if (!(std::abs(det) > 0.0)) {
        fit.degenerate = true;
        return fit;
    }
    const double slope = (sw * sxy - sx * sy) / det;
    const double intercept = (sxx * sy - sx * sxy) / det;
    fit.intercept = intercept;
    fit.lambda2_hat = -slope;

    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (intercept + slope * x[i]);
        ssr += r * r;
    }
    fit.residual_rms = std::sqrt(ssr / static_cast<double>(x.size()));

    // Parameter covariance: (X^T W X)^-1 when the weights are real
    // standard errors, the usual s^2 (X^T X)^-1 otherwise.
    double scale = 1.0;
    if (!use_weights && x.size() > 2) scale = ssr / static_cast<double>(x.size() - 2);
    fit.var_slope = scale * sw / det;
    fit.var_intercept = scale * sxx / det;
    fit.cov_slope_intercept = -scale * sx / det;

    if (fit.lambda2_hat > 0.0) {
        const double l2 = fit.lambda2_hat;
        fit.T_hat = std::exp(intercept / l2);
        // Delta method on ln(T_hat) = intercept / lambda2_hat.
        const double g0 = 1.0 / l2;
        const double g1 = intercept / (l2 * l2);
        const double var_lnT = g0 * g0 * fit.var_intercept + g1 * g1 * fit.var_slope +
                               2.0 * g0 * g1 * fit.cov_slope_intercept;
        if (var_lnT >= 0.0) fit.T_stderr = *fit.T_hat * std::sqrt(var_lnT);
    } else {
        fit.degenerate = true;
    }
    return fit;
}

struct ScanRow {
    double delta_t = 0.0;
    double lambda2_hat = 0.0;
    std::optional<double> T_hat{};
    std::optional<double> T_stderr{};
    bool degenerate = false;
    std::size_t n_windows = 0;
};

/// Apparent-integral-scale scan: for each window length delta_t, run the
/// subsampling protocol and fit the log decay on lags [2h, delta_t/4].
/// For the non-stationary model T_hat(delta_t) is expected to track
/// e^{-3/2} delta_t.
inline std::vector<ScanRow> integral_scale_scan(const MagnitudeSeries& s,
                                                const std::vector<double>& delta_t_list) {
    std::vector<ScanRow> rows;
    for (const double delta_t : delta_t_list) {
        const auto n_sub = static_cast<std::size_t>(std::llround(delta_t / s.h));
        if (s.values.size() / n_sub < 2)
            throw std::invalid_argument("integral_scale_scan: delta_t admits fewer than 2 windows");
        const std::size_t max_lag = n_sub / 4;
        const CovarianceEstimate est = subsampled_covariance(s, delta_t, max_lag);
        const ScalingFit fit = fit_log_decay(est, 2.0 * s.h, delta_t / 4.0);
        ScanRow row;
        row.delta_t = delta_t;
        row.lambda2_hat = fit.lambda2_hat;
        row.T_hat = fit.T_hat;
        row.T_stderr = fit.T_stderr;
        row.degenerate = fit.degenerate;
        row.n_windows = est.n_subsamples;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace cascade
