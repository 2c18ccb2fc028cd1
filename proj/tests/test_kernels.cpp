#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include <cascade/kernels.hpp>
#include <cascade/measure.hpp>
#include <cascade/params.hpp>

using namespace cascade;

namespace {
CascadeParams stationary_params(double lambda2, double T, double ell) {
    return CascadeParams{lambda2, T, ell, 1.0};
}
CascadeParams nonstationary_params(double lambda2, double ell) {
    return CascadeParams{lambda2, std::nullopt, ell, 1.0};
}
}  // namespace

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(nonstationary_params(-0.1, 1.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(nonstationary_params(0.1, 0.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(stationary_params(0.1, 0.5, 1.0).validate(), std::invalid_argument);
    CHECK_NOTHROW(stationary_params(0.1, 1.0, 1.0).validate());
    CHECK_THROWS_AS((TimeGrid{-1.0, 1.0, 4}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((TimeGrid{0.0, 0.0, 4}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((TimeGrid{0.0, 1.0, 0}.validate()), std::invalid_argument);
}

TEST_CASE("stationary covariance branch values") {
    const auto p = stationary_params(1.0, 100.0, 1.0);
    CHECK(cov_stationary(10.0, p) == Catch::Approx(std::log(10.0)).epsilon(1e-14));
    CHECK(cov_stationary(0.0, p) == Catch::Approx(std::log(100.0) + 1.0).epsilon(1e-14));
    CHECK(cov_stationary(100.0, p) == 0.0);      // tau = T, log branch boundary
    CHECK(cov_stationary(100.0001, p) == 0.0);   // beyond T
    CHECK_THROWS_AS(cov_stationary(1.0, nonstationary_params(1.0, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(cov_stationary(-1.0, p), std::invalid_argument);
}

TEST_CASE("stationary mean") {
    CHECK(mean_stationary(stationary_params(1.0, 2.0, 2.0)) == Catch::Approx(-0.5));
    CHECK(mean_stationary(stationary_params(1.0, 100.0, 1.0)) ==
          Catch::Approx(-0.5 * (1.0 + std::log(100.0))).epsilon(1e-14));
    CHECK(mean_stationary(stationary_params(0.0, 100.0, 1.0)) == 0.0);
}

TEST_CASE("nonstationary covariance branch values") {
    const auto p = nonstationary_params(1.0, 1.0);
    CHECK(cov_nonstationary(5.0, 10.0, p) == Catch::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(cov_nonstationary(10.0, 5.0, p) == cov_nonstationary(5.0, 10.0, p));  // symmetric
    CHECK(cov_nonstationary(0.5, 0.5, p) == 0.0);  // empty cone below the cutoff
    const double e = std::exp(1.0);
    CHECK(cov_nonstationary(e, e, p) == Catch::Approx(2.0).epsilon(1e-14));  // variance 1 + ln t
    CHECK(var_nonstationary(e, p) == cov_nonstationary(e, e, p));
    CHECK_THROWS_AS(cov_nonstationary(-1.0, 5.0, p), std::invalid_argument);
    // Either cone empty kills the covariance.
    CHECK(cov_nonstationary(0.5, 10.0, p) == 0.0);
}

TEST_CASE("nonstationary mean") {
    const auto p01 = nonstationary_params(0.01, 1.0);
    CHECK(mean_nonstationary(1.0, nonstationary_params(1.0, 1.0)) == Catch::Approx(-0.5));
    CHECK(mean_nonstationary(100.0, p01) ==
          Catch::Approx(-0.005 * (1.0 + std::log(100.0))).epsilon(1e-12));
    CHECK(mean_nonstationary(100.0, nonstationary_params(0.0, 1.0)) == 0.0);
    CHECK(mean_nonstationary(0.25, p01) == 0.0);  // degenerate below cutoff
    // Mean is -Var/2 wherever the field is active.
    CHECK(mean_nonstationary(7.0, p01) == Catch::Approx(-0.5 * var_nonstationary(7.0, p01)));
}

TEST_CASE("increment covariance") {
    const auto p = nonstationary_params(1.0, 0.1);
    CHECK(increment_cov(1.0, std::sqrt(2.0), p) == Catch::Approx(std::log(0.5)).epsilon(1e-14));
    CHECK(increment_cov(1.0, 1e9, p) == Catch::Approx(0.0).margin(1e-12));
    CHECK(increment_cov(1.0, 2.0, nonstationary_params(0.01, 0.1)) ==
          Catch::Approx(0.01 * std::log(0.75)).epsilon(1e-12));
    CHECK_THROWS_AS(increment_cov(1.0, 1.0, p), std::domain_error);
    CHECK_THROWS_AS(increment_cov(2.0, 1.0, p), std::domain_error);
    // Anti-correlation at any admissible lag.
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double h = 0.2 + u(rng);
        const double tau = h * (1.0 + u(rng) * 10.0 + 1e-6);
        CHECK(increment_cov(h, tau, p) <= 0.0);
    }
}

TEST_CASE("increment covariance matches the exact kernel algebra") {
    // Cov[delta omega(t), delta omega(t+tau)] expanded through
    // cov_nonstationary; exact whenever all four pair lags exceed the cutoff.
    const auto p = nonstationary_params(0.7, 0.05);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double h = 0.2 + u(rng);
        const double tau = h + p.cutoff + u(rng) * 20.0 + 1e-3;
        const double t = p.cutoff + u(rng) * 50.0;
        const double direct = cov_nonstationary(t + h, t + tau + h, p) -
                              cov_nonstationary(t + h, t + tau, p) -
                              cov_nonstationary(t, t + tau + h, p) +
                              cov_nonstationary(t, t + tau, p);
        CHECK(increment_cov(h, tau, p) == Catch::Approx(direct).margin(1e-12));
    }
}

TEST_CASE("kernel continuity across branch boundaries") {
    // The two branch expressions evaluated at the same boundary point
    // must agree to 1e-12; the tau > T branch vanishes at tau = T.
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 300; ++i) {
        const double ell = 0.01 + u(rng) * 2.0;
        const double T = ell * (1.0 + u(rng) * 100.0);
        const double l2 = u(rng) * 1.5;

        const double log_branch_at_ell = l2 * std::log(T / ell);
        const double linear_branch_at_ell = l2 * (std::log(T / ell) + 1.0 - ell / ell);
        CHECK(std::abs(log_branch_at_ell - linear_branch_at_ell) < 1e-12);
        CHECK(std::abs(l2 * std::log(T / T)) < 1e-12);  // log branch at tau = T vs 0 beyond

        const auto ps = stationary_params(l2, T, ell);
        CHECK(cov_stationary(ell, ps) == Catch::Approx(log_branch_at_ell).margin(1e-12));
        CHECK(std::abs(cov_stationary(T, ps)) < 1e-12);

        const auto pn = nonstationary_params(l2, ell);
        const double t2 = ell * (2.0 + u(rng) * 100.0);
        const double ns_log_at_ell = l2 * std::log(t2 / ell);
        CHECK(cov_nonstationary(t2 - ell, t2, pn) == Catch::Approx(ns_log_at_ell).margin(1e-12));

        // And the kernel functions are continuous to first order across
        // the kink (difference bounded by the local slope).
        const double eps = 1e-9;
        const double slope = l2 / ell;
        CHECK(std::abs(cov_stationary(ell - eps, ps) - cov_stationary(ell + eps, ps)) <=
              2.1 * slope * eps + 1e-12);
    }
}

TEST_CASE("aging identity: nonstationary kernel is the stationary one with T = max(t1,t2)") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const double ell = 0.01 + u(rng);
        const double l2 = u(rng) * 1.5;
        const auto pn = nonstationary_params(l2, ell);
        const double t1 = ell + u(rng) * 100.0;
        const double t2 = t1 + u(rng) * 100.0;
        const auto ps = stationary_params(l2, std::max(t1, t2), ell);
        CHECK(cov_nonstationary(t1, t2, pn) == cov_stationary(t2 - t1, ps));
    }
}

TEST_CASE("kernel self-similarity under joint rescaling") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> pow2(-8, 8);
    for (int i = 0; i < 500; ++i) {
        const double ell = 0.01 + u(rng);
        const double l2 = u(rng) * 1.5;
        const double t1 = ell + u(rng) * 50.0;
        const double t2 = t1 + u(rng) * 50.0;
        const double T = t2 * (1.0 + u(rng) * 4.0);

        // Powers of two rescale exactly in floating point.
        const double r2 = std::ldexp(1.0, pow2(rng));
        CHECK(cov_nonstationary(r2 * t1, r2 * t2, nonstationary_params(l2, r2 * ell)) ==
              cov_nonstationary(t1, t2, nonstationary_params(l2, ell)));
        CHECK(cov_stationary(r2 * (t2 - t1), stationary_params(l2, r2 * T, r2 * ell)) ==
              cov_stationary(t2 - t1, stationary_params(l2, T, ell)));

        // Generic ratios agree to rounding error.
        const double r = 0.1 + u(rng) * 10.0;
        CHECK(cov_nonstationary(r * t1, r * t2, nonstationary_params(l2, r * ell)) ==
              Catch::Approx(cov_nonstationary(t1, t2, nonstationary_params(l2, ell)))
                  .margin(1e-12));
        CHECK(cov_stationary(r * (t2 - t1), stationary_params(l2, r * T, r * ell)) ==
              Catch::Approx(cov_stationary(t2 - t1, stationary_params(l2, T, ell))).margin(1e-12));
    }
}

TEST_CASE("assembled covariance matrices are positive semi-definite") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 4; ++rep) {
        const std::size_t n = 64 + static_cast<std::size_t>(u(rng) * 448);
        const double ell = 0.05 + u(rng);
        const double l2 = 0.05 + u(rng);
        const TimeGrid grid{ell * (0.1 + u(rng)), ell * (0.3 + u(rng)), n};
        for (const auto kind : {ModelKind::stationary, ModelKind::nonstationary}) {
            CascadeParams p = nonstationary_params(l2, ell);
            if (kind == ModelKind::stationary) p.integral_scale = grid.t_max() * (1.0 + u(rng));
            Eigen::MatrixXd sigma(n, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j <= i; ++j) {
                    const double c = cov(kind, grid.time(i), grid.time(j), p);
                    sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
                    sigma(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = c;
                }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma,
                                                               Eigen::EigenvaluesOnly);
            const double max_ev = eig.eigenvalues().maxCoeff();
            CHECK(eig.eigenvalues().minCoeff() >= -1e-8 * max_ev);
        }
    }
}

TEST_CASE("cone membership predicate") {
    const auto pn = nonstationary_params(1.0, 1.0);
    // s >= cutoff, max(0, t-s) <= u <= t, cone empty below the cutoff.
    CHECK(cone_contains(ModelKind::nonstationary, 10.0, 10.0, 1.0, pn));
    CHECK(cone_contains(ModelKind::nonstationary, 10.0, 7.0, 3.0, pn));
    CHECK_FALSE(cone_contains(ModelKind::nonstationary, 10.0, 6.9, 3.0, pn));
    CHECK_FALSE(cone_contains(ModelKind::nonstationary, 10.0, 10.1, 3.0, pn));
    CHECK_FALSE(cone_contains(ModelKind::nonstationary, 10.0, 10.0, 0.5, pn));
    CHECK(cone_contains(ModelKind::nonstationary, 10.0, 0.0, 50.0, pn));
    CHECK_FALSE(cone_contains(ModelKind::nonstationary, 0.5, 0.5, 2.0, pn));  // t < cutoff

    const auto ps = stationary_params(1.0, 5.0, 1.0);
    CHECK(cone_contains(ModelKind::stationary, 10.0, 10.0 - 3.0, 3.0, ps));
    CHECK_FALSE(cone_contains(ModelKind::stationary, 10.0, 10.0 - 3.1, 3.0, ps));
    CHECK(cone_contains(ModelKind::stationary, 10.0, 5.0, 50.0, ps));   // width capped at T
    CHECK_FALSE(cone_contains(ModelKind::stationary, 10.0, 4.9, 50.0, ps));
}

TEST_CASE("zeta parabola") {
    CHECK(zeta(0.0, 0.3) == 0.0);
    CHECK(zeta(1.0, 0.3) == Catch::Approx(1.0).epsilon(1e-15));
    CHECK(zeta(2.0, 0.3) == Catch::Approx(2.0 - 0.3).epsilon(1e-15));
    CHECK(zeta(2.0, 0.0) == Catch::Approx(2.0));

    // Concavity: second differences are non-positive on any q grid.
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const double l2 = u(rng);
        const double dq = 0.05 + u(rng);
        const double q0 = -5.0 + u(rng) * 5.0;
        for (int i = 0; i < 20; ++i) {
            const double q = q0 + i * dq;
            const double d2 = zeta(q + dq, l2) - 2.0 * zeta(q, l2) + zeta(q - dq, l2);
            CHECK(d2 <= 1e-12);
        }
    }
}
