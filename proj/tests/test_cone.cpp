#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <cascade/cone.hpp>

using namespace cascade;

TEST_CASE("cone sampler validation") {
    const TimeGrid grid{1.0, 1.0, 16};
    const CascadeParams p{0.5, std::nullopt, 1.0, 1.0};
    CHECK_THROWS_AS(ConeSampler(ModelKind::nonstationary, grid, p, 3), std::invalid_argument);
    CHECK_NOTHROW(ConeSampler(ModelKind::nonstationary, grid, p, 4));
    CHECK_THROWS_AS(ConeSampler(ModelKind::nonstationary, grid, p, 8, {1.0, 0.7}),
                    std::invalid_argument);  // off the layer grid
    CHECK_THROWS_AS(ConeSampler(ModelKind::nonstationary, grid, p, 8, {1.0, 2.0}),
                    std::invalid_argument);  // not decreasing
    CHECK_NOTHROW(ConeSampler(ModelKind::nonstationary, grid, p, 8, {2.0, 1.0}));
}

TEST_CASE("cone sampler degenerate cases") {
    const TimeGrid grid{0.0, 0.5, 24};
    const CascadeParams p{0.0, std::nullopt, 0.5, 1.0};
    const auto path = sample_path_cone(ModelKind::nonstationary, grid, p, 3030, 8);
    for (double v : path.values) CHECK(v == 0.0);

    const CascadeParams p2{0.7, std::nullopt, 1.0, 1.0};
    const auto path2 = sample_path_cone(ModelKind::nonstationary, grid, p2, 3030, 8);
    for (std::size_t i = 0; i < grid.n; ++i)
        if (grid.time(i) < p2.cutoff) CHECK(path2.values[i] == 0.0);
}

TEST_CASE("cone sampler is seed deterministic") {
    const TimeGrid grid{1.0, 1.0, 32};
    const CascadeParams p{0.6, std::nullopt, 1.0, 1.0};
    const auto a = sample_path_cone(ModelKind::nonstationary, grid, p, 44, 8);
    const auto b = sample_path_cone(ModelKind::nonstationary, grid, p, 44, 8);
    for (std::size_t i = 0; i < grid.n; ++i) CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("coupled levels share all cells above the finer cutoff") {
    // omega_ell and omega_2ell from one coupled draw differ only through
    // the cells below 2ell (plus the deterministic means), so
    // Var[omega_ell - omega_2ell] must be Var[omega_ell] - Var[omega_2ell]
    // = lambda2 * ln 2. Unshared noise would give the sum of the
    // variances instead, an order of magnitude larger here.
    const TimeGrid grid{16.0, 1.0, 4};
    const CascadeParams p{0.5, std::nullopt, 1.0, 1.0};
    ConeSampler coupled(ModelKind::nonstationary, grid, p, 8, {2.0, 1.0});

    const std::size_t reps = 600;
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
        const auto paths = coupled.sample_all(123, r);
        const double d = paths[1].values[0] - paths[0].values[0];
        sum += d;
        sum_sq += d * d;
    }
    const double n = static_cast<double>(reps);
    const double var = sum_sq / n - (sum / n) * (sum / n);
    const double expected = p.lambda2 * std::log(2.0);
    const double se = expected * std::sqrt(2.0 / n);
    CHECK(std::abs(var - expected) < 4.0 * se + 0.02 * expected);
}

TEST_CASE("overlapping cones share their noise cells") {
    // Two nearby times draw from almost the same cell set; their
    // empirical correlation must match the kernel correlation, which is
    // close to 1 here. Unshared cells would give correlation ~ 0.
    const TimeGrid grid{8.0, 0.25, 8};  // t in [8, 9.75]
    const CascadeParams p{1.0, std::nullopt, 8.0, 1.0};
    ConeSampler sampler(ModelKind::nonstationary, grid, p, 4);

    const std::size_t reps = 800;
    double s00 = 0, s11 = 0, s01 = 0, m0 = 0, m1 = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        const auto path = sampler.sample(5, r);
        const double a = path.values.front(), b = path.values.back();
        m0 += a; m1 += b;
        s00 += a * a; s11 += b * b; s01 += a * b;
    }
    const double n = static_cast<double>(reps);
    const double c00 = s00 / n - (m0 / n) * (m0 / n);
    const double c11 = s11 / n - (m1 / n) * (m1 / n);
    const double c01 = s01 / n - (m0 / n) * (m1 / n);
    const double corr = c01 / std::sqrt(c00 * c11);
    const double t1 = grid.time(0), t2 = grid.t_max();
    const double corr_theory =
        cov_nonstationary(t1, t2, p) /
        std::sqrt(var_nonstationary(t1, p) * var_nonstationary(t2, p));
    CHECK(corr == Catch::Approx(corr_theory).margin(0.05));
    CHECK(corr > 0.8);
}
