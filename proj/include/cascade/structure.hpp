#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "cascade/measure.hpp"

namespace cascade {

/// Empirical or exact moment values on an (order, lag) grid.
struct MomentTable {
    enum class Kind { exact, monte_carlo };
    std::vector<double> orders;
    std::vector<double> lags;
    std::vector<std::vector<double>> values;  // values[qi][ti]
    Kind kind = Kind::monte_carlo;
};

struct StructureFunctions {
    MomentTable moments;
    std::vector<double> zeta_hat;  // per order, slope of ln moment vs ln tau
    std::vector<double> zeta_se;
    std::vector<double> c_q;       // curvature of ln moment in q at the smallest lag
                                   // (NaN at the q-grid ends)
    std::vector<double> kurtosis;  // F(tau) = m4/m2^2 when orders 2 and 4 are present
};

namespace detail {

inline void slope_fit(std::span<const double> x, std::span<const double> y, double& slope,
                      double& se) {
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    slope = (n * sxy - sx * sy) / det;
    const double intercept = (sxx * sy - sx * sxy) / det;
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - intercept - slope * x[i];
        ssr += r * r;
    }
    const double s2 = x.size() > 2 ? ssr / (n - 2.0) : 0.0;
    se = std::sqrt(s2 * n / det);
}

}  // namespace detail

/// Structure functions of a sampled process: empirical absolute moments
/// E|x(t+tau) - x(t)|^q over all increments at each lag, scaling
/// exponents zeta_hat(q) from the log-log slope, the kurtosis curve
/// F(tau), and the q-curvature c_q of the log moments at the smallest
/// lag. Lags must be integer multiples of the grid step.
inline StructureFunctions structure_functions(const TimeGrid& grid, std::span<const double> series,
                                              const std::vector<double>& q_list,
                                              const std::vector<double>& tau_list) {
    if (series.size() != grid.n)
        throw std::invalid_argument("structure_functions: series length must match grid");
    if (q_list.empty() || tau_list.size() < 2)
        throw std::invalid_argument("structure_functions: need orders and at least 2 lags");

    StructureFunctions sf;
    sf.moments.orders = q_list;
    sf.moments.lags = tau_list;
    sf.moments.kind = MomentTable::Kind::monte_carlo;
    sf.moments.values.assign(q_list.size(), std::vector<double>(tau_list.size(), 0.0));

    for (std::size_t ti = 0; ti < tau_list.size(); ++ti) {
        const double steps = tau_list[ti] / grid.dt;
        const auto k = static_cast<std::size_t>(std::llround(steps));
        if (k < 1 || k >= grid.n || std::abs(steps - static_cast<double>(k)) > 1e-9)
            throw std::invalid_argument(
                "structure_functions: lags must be integer multiples of dt within the span");
        const std::size_t count = grid.n - k;
        for (std::size_t qi = 0; qi < q_list.size(); ++qi) {
            double acc = 0.0;
            for (std::size_t i = 0; i < count; ++i)
                acc += std::pow(std::abs(series[i + k] - series[i]), q_list[qi]);
            sf.moments.values[qi][ti] = acc / static_cast<double>(count);
        }
    }

    std::vector<double> log_tau(tau_list.size());
    for (std::size_t ti = 0; ti < tau_list.size(); ++ti) log_tau[ti] = std::log(tau_list[ti]);

    for (std::size_t qi = 0; qi < q_list.size(); ++qi) {
        std::vector<double> log_m(tau_list.size());
        for (std::size_t ti = 0; ti < tau_list.size(); ++ti) {
            if (!(sf.moments.values[qi][ti] > 0.0))
                throw std::runtime_error("structure_functions: degenerate input, vanishing moment");
            log_m[ti] = std::log(sf.moments.values[qi][ti]);
        }
        double slope = 0.0, se = 0.0;
        detail::slope_fit(log_tau, log_m, slope, se);
        sf.zeta_hat.push_back(slope);
        sf.zeta_se.push_back(se);
    }

    // c_q: second difference in q of ln moment at the smallest lag.
    std::size_t ti_min = 0;
    for (std::size_t ti = 1; ti < tau_list.size(); ++ti)
        if (tau_list[ti] < tau_list[ti_min]) ti_min = ti;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    sf.c_q.assign(q_list.size(), nan);
    for (std::size_t qi = 1; qi + 1 < q_list.size(); ++qi) {
        const double h1 = q_list[qi] - q_list[qi - 1];
        const double h2 = q_list[qi + 1] - q_list[qi];
        const double y0 = std::log(sf.moments.values[qi - 1][ti_min]);
        const double y1 = std::log(sf.moments.values[qi][ti_min]);
        const double y2 = std::log(sf.moments.values[qi + 1][ti_min]);
        sf.c_q[qi] = 2.0 * ((y2 - y1) / h2 - (y1 - y0) / h1) / (h1 + h2);
    }

    // Kurtosis curve when orders 2 and 4 are both on the grid.
    std::ptrdiff_t q2 = -1, q4 = -1;
    for (std::size_t qi = 0; qi < q_list.size(); ++qi) {
        if (std::abs(q_list[qi] - 2.0) < 1e-12) q2 = static_cast<std::ptrdiff_t>(qi);
        if (std::abs(q_list[qi] - 4.0) < 1e-12) q4 = static_cast<std::ptrdiff_t>(qi);
    }
    if (q2 >= 0 && q4 >= 0) {
        for (std::size_t ti = 0; ti < tau_list.size(); ++ti) {
            const double m2 = sf.moments.values[static_cast<std::size_t>(q2)][ti];
            sf.kurtosis.push_back(sf.moments.values[static_cast<std::size_t>(q4)][ti] / (m2 * m2));
        }
    }
    return sf;
}

inline StructureFunctions structure_functions(const MeasurePath& m, const std::vector<double>& q_list,
                                              const std::vector<double>& tau_list) {
    return structure_functions(m.grid, m.cumulative, q_list, tau_list);
}

inline StructureFunctions structure_functions(const MrwPath& x, const std::vector<double>& q_list,
                                              const std::vector<double>& tau_list) {
    return structure_functions(x.grid, x.values, q_list, tau_list);
}

struct ConcavityReport {
    std::vector<double> q;            // interior grid points
    std::vector<double> second_diff;  // raw second differences of zeta_hat
    std::vector<double> tolerance;    // 3 x propagated fit error
    std::vector<std::size_t> violations;  // indices into q
};

/// Flags q points where the estimated zeta curves upward beyond the fit
/// error; an exact parabola reports uniform negative second differences
/// and no violations.
inline ConcavityReport concavity_check(const StructureFunctions& sf) {
    const auto& q = sf.moments.orders;
    if (q.size() < 3) throw std::invalid_argument("concavity_check: need at least 3 orders");
    ConcavityReport report;
    for (std::size_t i = 1; i + 1 < q.size(); ++i) {
        const double d2 = sf.zeta_hat[i + 1] - 2.0 * sf.zeta_hat[i] + sf.zeta_hat[i - 1];
        const double se = std::sqrt(sf.zeta_se[i + 1] * sf.zeta_se[i + 1] +
                                    4.0 * sf.zeta_se[i] * sf.zeta_se[i] +
                                    sf.zeta_se[i - 1] * sf.zeta_se[i - 1]);
        report.q.push_back(q[i]);
        report.second_diff.push_back(d2);
        report.tolerance.push_back(3.0 * se + 1e-12);
        if (d2 > report.tolerance.back())
            report.violations.push_back(report.q.size() - 1);
    }
    return report;
}

/// Largest scale compatible with the estimated multiscaling:
/// min over q of exp(-c_q / zeta''(q)) taken where zeta'' < 0. Returns
/// +infinity when no concave point exists (monofractal: no bound).
/// Negative c_q estimates (noise) are clamped to 0, where the bound
/// degenerates to 1.
inline double integral_scale_bound(const StructureFunctions& sf) {
    const auto& q = sf.moments.orders;
    if (q.size() < 3) throw std::invalid_argument("integral_scale_bound: need at least 3 orders");
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < q.size(); ++i) {
        const double h1 = q[i] - q[i - 1];
        const double h2 = q[i + 1] - q[i];
        const double zdd = 2.0 *
                           ((sf.zeta_hat[i + 1] - sf.zeta_hat[i]) / h2 -
                            (sf.zeta_hat[i] - sf.zeta_hat[i - 1]) / h1) /
                           (h1 + h2);
        if (!(zdd < 0.0)) continue;
        const double cq = std::isnan(sf.c_q[i]) ? 0.0 : std::max(0.0, sf.c_q[i]);
        bound = std::min(bound, std::exp(-cq / zdd));
    }
    return bound;
}

}  // namespace cascade
