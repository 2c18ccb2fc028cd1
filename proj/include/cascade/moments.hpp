#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "cascade/params.hpp"

namespace cascade {
namespace detail {

/// Adaptive Simpson quadrature with absolute tolerance. Throws when the
/// recursion depth is exhausted before the tolerance is met.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double abs_tol, int max_depth = 60) {
    struct Engine {
        F& f;
        int max_depth;
        double run(double a, double fa, double b, double fb, double m, double fm,
                   double whole, double tol, int depth) const {
            const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            const double flm = f(lm), frm = f(rm);
            const double h6 = (b - a) / 12.0;
            const double left = h6 * (fa + 4.0 * flm + fm);
            const double right = h6 * (fm + 4.0 * frm + fb);
            const double delta = left + right - whole;
            if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
            if (depth >= max_depth)
                throw std::runtime_error("adaptive_simpson: no convergence at requested tolerance");
            return run(a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1) +
                   run(m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1);
        }
    };
    if (!(b > a)) return 0.0;
    double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return Engine{f, max_depth}.run(a, fa, b, fb, m, fm, whole, abs_tol, 0);
}

/// Double integral of (max(u,v)/|u-v|)^lambda2 over [lo, lo+span]^2.
///
/// By symmetry this is twice the integral over the lower triangle u < v,
/// where max(u,v) = v. The substitution w = (v-u)^(1-lambda2) along the
/// diagonal absorbs the integrable |u-v|^(-lambda2) singularity exactly
/// (the transformed inner integrand is constant in w), leaving the outer
/// v-integral for adaptive quadrature. A second substitution
/// v = lo + y^(2/m) removes the fractional-power corner of the outer
/// integrand at v = lo, where raw recursion would hit cancellation in
/// v - lo long before reaching the tolerance.
inline double lognormal_square_integral(double lo, double span, double lambda2, double abs_tol) {
    const double m = 1.0 - lambda2;
    const double p = 2.0 / m;
    auto outer = [&](double y) {
        const double v = lo + std::pow(y, p);
        return (2.0 / (m * m)) * std::pow(v, lambda2) * std::pow(y, p + 1.0);
    };
    return 2.0 * adaptive_simpson(outer, 0.0, std::pow(span, 0.5 * m), 0.5 * abs_tol);
}

}  // namespace detail

/// Second moment of the non-stationary measure at sigma2 = 1:
/// E[M(tau)^2] = C2 tau^2 with C2 the double integral of
/// (max(u,v)/|u-v|)^lambda2 over the unit square, evaluated numerically.
inline double exact_moment2(double tau, double lambda2, double abs_tol = 1e-8) {
    if (!(lambda2 >= 0.0)) throw std::invalid_argument("exact_moment2: lambda2 must be >= 0");
    if (lambda2 >= 1.0)
        throw std::domain_error("exact_moment2: second moment diverges for lambda2 >= 1");
    if (!(tau >= 0.0)) throw std::invalid_argument("exact_moment2: tau must be >= 0");
    if (tau == 0.0) return 0.0;
    return detail::lognormal_square_integral(0.0, tau, lambda2, abs_tol);
}

/// Second moment of a measure increment, E[(M(t+tau) - M(t))^2], at
/// sigma2 = 1: the same integrand over [t, t+tau]^2. Reduces to
/// exact_moment2(tau) at t = 0; for tau << t it follows the
/// C2(t) tau^(2-lambda2) law with C2(t) ~ t^(-lambda2).
inline double exact_increment_moment2(double t, double tau, double lambda2,
                                      double abs_tol = 1e-8) {
    if (!(lambda2 >= 0.0)) throw std::invalid_argument("exact_increment_moment2: lambda2 must be >= 0");
    if (lambda2 >= 1.0)
        throw std::domain_error("exact_increment_moment2: second moment diverges for lambda2 >= 1");
    if (!(t >= 0.0)) throw std::invalid_argument("exact_increment_moment2: t must be >= 0");
    if (!(tau > 0.0)) throw std::invalid_argument("exact_increment_moment2: tau must be > 0");
    return detail::lognormal_square_integral(t, tau, lambda2, abs_tol);
}

}  // namespace cascade
