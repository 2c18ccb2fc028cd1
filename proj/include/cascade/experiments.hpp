#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cascade/estimators.hpp"
#include "cascade/fits.hpp"
#include "cascade/market_data.hpp"
#include "cascade/measure.hpp"
#include "cascade/sampling.hpp"

namespace cascade::experiments {

/// Monte-Carlo ensemble of omega paths on one grid with the factor cached.
/// fn(replica_index, path) is called in replica order.
template <class Fn>
void for_each_replica(const DensePathSampler& sampler, std::size_t reps, std::uint64_t seed,
                      Fn&& fn) {
    for (std::size_t r = 0; r < reps; ++r) fn(r, sampler.sample_stream(seed, r));
}

// ---------------------------------------------------------------------------
// Aging covariance experiment (lines of constant t2 against ln tau).
// ---------------------------------------------------------------------------

struct AgingCovarianceConfig {
    double lambda2 = 1.0;
    double ell = 1.0;
    std::size_t n = 500;
    std::size_t reps = 500;
    std::uint64_t seed = 1;
    std::vector<double> t2_list{10.0, 40.0, 150.0, 500.0};
    double min_lag_factor = 2.0;  // compare only lags >= this many cutoffs
};

struct AgingCovarianceCurve {
    double t2 = 0.0;
    std::vector<double> lag;
    std::vector<double> empirical;
    std::vector<double> se;
    std::vector<double> theory;
    std::size_t n_within = 0;
};

struct AgingCovarianceResult {
    std::vector<AgingCovarianceCurve> curves;
    double fraction_within = 0.0;  // pooled over curves, |emp - theory| <= 3 se
    bool pass = false;
};

inline AgingCovarianceResult run_aging_covariance(const AgingCovarianceConfig& cfg) {
    const CascadeParams params{cfg.lambda2, std::nullopt, cfg.ell, 1.0};
    const TimeGrid grid{cfg.ell, cfg.ell, cfg.n};
    DensePathSampler sampler(ModelKind::nonstationary, grid, params);

    std::vector<std::vector<double>> paths(cfg.reps);
    for_each_replica(sampler, cfg.reps, cfg.seed,
                     [&](std::size_t r, const GaussianLogVolPath& p) { paths[r] = p.values; });

    std::vector<double> mean(cfg.n, 0.0);
    for (const auto& p : paths)
        for (std::size_t i = 0; i < cfg.n; ++i) mean[i] += p[i];
    for (auto& m : mean) m /= static_cast<double>(cfg.reps);

    AgingCovarianceResult result;
    std::size_t within = 0, total = 0;
    for (const double t2 : cfg.t2_list) {
        const auto j = static_cast<std::size_t>(std::llround((t2 - cfg.ell) / cfg.ell));
        if (j >= cfg.n) throw std::invalid_argument("run_aging_covariance: t2 beyond the grid");
        AgingCovarianceCurve curve;
        curve.t2 = t2;
        for (std::size_t i = 0; i < j; ++i) {
            const double tau = t2 - grid.time(i);
            if (tau < cfg.min_lag_factor * cfg.ell) continue;
            double s = 0.0, s2 = 0.0;
            for (const auto& p : paths) {
                const double prod = (p[i] - mean[i]) * (p[j] - mean[j]);
                s += prod;
                s2 += prod * prod;
            }
            const double r = static_cast<double>(cfg.reps);
            const double cov_emp = s / r;
            const double se = std::sqrt(std::max(0.0, s2 / r - cov_emp * cov_emp) / r);
            curve.lag.push_back(tau);
            curve.empirical.push_back(cov_emp);
            curve.se.push_back(se);
            curve.theory.push_back(cov_nonstationary(grid.time(i), t2, params));
            ++total;
            if (std::abs(cov_emp - curve.theory.back()) <= 3.0 * se) {
                ++within;
                ++curve.n_within;
            }
        }
        result.curves.push_back(std::move(curve));
    }
    result.fraction_within = total ? static_cast<double>(within) / static_cast<double>(total) : 0.0;
    result.pass = result.fraction_within >= 0.95;
    return result;
}

// ---------------------------------------------------------------------------
// Aging variance experiment (Var[omega(t)] against ln t).
// ---------------------------------------------------------------------------

struct AgingVarianceConfig {
    double lambda2 = 1.0;
    double ell = 1.0;
    std::size_t n = 500;
    std::size_t reps = 500;
    std::uint64_t seed = 1;
    double fit_lo = 10.0;  // regression window in units of the cutoff
    double fit_hi = 500.0;
    double slope_rtol = 0.05;
    double intercept_rtol = 0.15;
};

struct AgingVarianceResult {
    std::vector<double> t;
    std::vector<double> var_empirical;
    std::vector<double> var_theory;
    std::vector<double> se;
    double slope = 0.0;      // expected lambda2
    double intercept = 0.0;  // expected lambda2 (at ell = 1)
    bool pass_slope = false;
    bool pass_intercept = false;
    bool pass = false;
};

inline AgingVarianceResult run_aging_variance(const AgingVarianceConfig& cfg) {
    const CascadeParams params{cfg.lambda2, std::nullopt, cfg.ell, 1.0};
    const TimeGrid grid{cfg.ell, cfg.ell, cfg.n};
    DensePathSampler sampler(ModelKind::nonstationary, grid, params);

    std::vector<double> sum(cfg.n, 0.0), sum_sq(cfg.n, 0.0);
    for_each_replica(sampler, cfg.reps, cfg.seed, [&](std::size_t, const GaussianLogVolPath& p) {
        for (std::size_t i = 0; i < cfg.n; ++i) {
            sum[i] += p.values[i];
            sum_sq[i] += p.values[i] * p.values[i];
        }
    });

    AgingVarianceResult result;
    const double r = static_cast<double>(cfg.reps);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < cfg.n; ++i) {
        const double t = grid.time(i);
        const double mu = sum[i] / r;
        const double var = (sum_sq[i] - r * mu * mu) / (r - 1.0);
        result.t.push_back(t);
        result.var_empirical.push_back(var);
        result.var_theory.push_back(var_nonstationary(t, params));
        result.se.push_back(var * std::sqrt(2.0 / (r - 1.0)));
        if (t >= cfg.fit_lo * cfg.ell && t <= cfg.fit_hi * cfg.ell) {
            const double x = std::log(t / cfg.ell);
            sx += x;
            sy += var;
            sxx += x * x;
            sxy += x * var;
            ++m;
        }
    }
    const double dm = static_cast<double>(m);
    const double det = dm * sxx - sx * sx;
    result.slope = (dm * sxy - sx * sy) / det;
    result.intercept = (sxx * sy - sx * sxy) / det;
    result.pass_slope = std::abs(result.slope - cfg.lambda2) <= cfg.slope_rtol * cfg.lambda2;
    result.pass_intercept =
        std::abs(result.intercept - cfg.lambda2) <= cfg.intercept_rtol * cfg.lambda2;
    result.pass = result.pass_slope && result.pass_intercept;
    return result;
}

// ---------------------------------------------------------------------------
// Long synthetic magnitude series (blockwise path -> measure -> ln delta M).
// ---------------------------------------------------------------------------

struct SyntheticSeriesConfig {
    double lambda2 = 0.01;
    double ell = 1.0;
    std::size_t length = 20480;  // number of magnitude samples
    std::uint64_t seed = 1;
    std::size_t block_n = 4096;
};

struct SyntheticSeries {
    GaussianLogVolPath path;
    MeasurePath measure;
    MagnitudeSeries magnitude;
};

inline SyntheticSeries synthesize_magnitude(const SyntheticSeriesConfig& cfg) {
    const CascadeParams params{cfg.lambda2, std::nullopt, cfg.ell, 1.0};
    const TimeGrid grid{0.0, cfg.ell, cfg.length + 1};
    SyntheticSeries out;
    out.path = sample_path_blockwise(ModelKind::nonstationary, grid, params, cfg.seed, cfg.block_n);
    out.measure = build_measure(out.path);
    out.magnitude = magnitude_from_measure(out.measure, cfg.ell);
    return out;
}

// ---------------------------------------------------------------------------
// Subsample covariance curves with first-order theory overlays.
// ---------------------------------------------------------------------------

struct MagnitudeCovarianceScanConfig {
    std::vector<double> delta_t{16.0, 32.0, 64.0, 128.0, 256.0, 512.0};
    double lambda2_theory = 0.01;  // used for the overlay curves
};

struct MagnitudeCovarianceCurves {
    std::vector<CovarianceEstimate> estimates;  // one per delta_t
    std::vector<std::vector<double>> theory;    // expected_cov_approx on each lag > 0
    double fraction_within = 0.0;               // over fit-range lags [2h, delta_t/4]
    bool pass = false;
};

inline MagnitudeCovarianceCurves run_covariance_curves(const MagnitudeSeries& series,
                                                       const MagnitudeCovarianceScanConfig& cfg) {
    MagnitudeCovarianceCurves out;
    std::size_t within = 0, total = 0;
    for (const double delta_t : cfg.delta_t) {
        const auto n_sub = static_cast<std::size_t>(std::llround(delta_t / series.h));
        const std::size_t max_lag = n_sub / 2;
        CovarianceEstimate est = subsampled_covariance(series, delta_t, max_lag);
        std::vector<double> theory(est.lags.size(), 0.0);
        for (std::size_t i = 1; i < est.lags.size(); ++i) {
            theory[i] = expected_cov_approx(est.lags[i], delta_t, cfg.lambda2_theory);
            const bool in_fit_range =
                est.lags[i] >= 2.0 * series.h && est.lags[i] <= delta_t / 4.0;
            if (in_fit_range && !est.se.empty()) {
                ++total;
                if (std::abs(est.values[i] - theory[i]) <= 3.0 * est.se[i]) ++within;
            }
        }
        out.estimates.push_back(std::move(est));
        out.theory.push_back(std::move(theory));
    }
    out.fraction_within = total ? static_cast<double>(within) / static_cast<double>(total) : 0.0;
    out.pass = out.fraction_within >= 0.95;
    return out;
}

// ---------------------------------------------------------------------------
// Apparent integral scale scan and its log-log regression.
// ---------------------------------------------------------------------------

struct ApparentScaleResult {
    std::vector<ScanRow> rows;
    double slope = 0.0;        // of ln T_hat on ln delta_t, expected 1
    double mean_offset = 0.0;  // mean ln(T_hat/delta_t), expected -3/2
    bool pass_slope = false;
    bool pass_offset = false;
    bool pass = false;
};

inline ApparentScaleResult run_apparent_scale_scan(const MagnitudeSeries& series,
                                                   const std::vector<double>& delta_t_list,
                                                   double slope_tol = 0.15,
                                                   double offset_tol = 0.3) {
    ApparentScaleResult out;
    out.rows = integral_scale_scan(series, delta_t_list);
    double sx = 0, sy = 0, sxx = 0, sxy = 0, offset = 0;
    std::size_t m = 0;
    for (const auto& row : out.rows) {
        if (!row.T_hat) continue;
        const double x = std::log(row.delta_t);
        const double y = std::log(*row.T_hat);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        offset += y - x;
        ++m;
    }
    if (m >= 2) {
        const double dm = static_cast<double>(m);
        out.slope = (dm * sxy - sx * sy) / (dm * sxx - sx * sx);
        out.mean_offset = offset / dm;
        out.pass_slope = std::abs(out.slope - 1.0) <= slope_tol;
        out.pass_offset = std::abs(out.mean_offset + 1.5) <= offset_tol;
        out.pass = out.pass_slope && out.pass_offset && m == out.rows.size();
    }
    return out;
}

// ---------------------------------------------------------------------------
// OHLC analysis pipeline (market_data -> estimators).
// ---------------------------------------------------------------------------

struct AnalyzeConfig {
    std::vector<double> delta_t{16.0, 32.0, 64.0, 128.0, 256.0, 512.0};
    RangeProxy proxy = RangeProxy::log_range;
    std::optional<double> lambda2{};  // overlay value; fitted from the largest
                                      // delta_t when absent
};

struct AnalyzeResult {
    DailyMagnitudeSeries daily;
    MagnitudeSeries magnitude;
    double lambda2_used = 0.0;
    bool lambda2_fitted = false;
    MagnitudeCovarianceCurves curves;
    ApparentScaleResult scan;
    std::vector<std::string> warnings;
};

inline AnalyzeResult run_analyze(std::span<const OhlcRecord> records, const AnalyzeConfig& cfg) {
    AnalyzeResult out;
    out.daily = magnitude_series(records, cfg.proxy);
    out.magnitude = to_magnitude_series(out.daily);
    if (out.daily.skipped_zero_range > 0)
        out.warnings.push_back("skipped " + std::to_string(out.daily.skipped_zero_range) +
                               " zero-range days");

    std::vector<double> usable;
    for (const double dt : cfg.delta_t) {
        const auto n_sub = static_cast<std::size_t>(std::llround(dt / out.magnitude.h));
        if (n_sub >= 8 && out.magnitude.size() / n_sub >= 2)
            usable.push_back(dt);
        else
            out.warnings.push_back("series too short for delta_t=" + std::to_string(dt));
    }
    if (usable.empty()) throw std::invalid_argument("run_analyze: series too short for every delta_t");

    if (cfg.lambda2) {
        out.lambda2_used = *cfg.lambda2;
    } else {
        const double dt_max = usable.back();
        const auto est = subsampled_covariance(
            out.magnitude, dt_max,
            static_cast<std::size_t>(std::llround(dt_max / out.magnitude.h)) / 4);
        const auto fit = fit_log_decay(est, 2.0 * out.magnitude.h, dt_max / 4.0);
        out.lambda2_used = fit.degenerate ? 0.0 : fit.lambda2_hat;
        out.lambda2_fitted = true;
    }

    MagnitudeCovarianceScanConfig curve_cfg;
    curve_cfg.delta_t = usable;
    curve_cfg.lambda2_theory = out.lambda2_used;
    out.curves = run_covariance_curves(out.magnitude, curve_cfg);
    out.scan = run_apparent_scale_scan(out.magnitude, usable);
    return out;
}

}  // namespace cascade::experiments
