#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cascade/kernels.hpp"
#include "cascade/params.hpp"
#include "cascade/rng.hpp"

namespace cascade {

/// Thrown when the covariance matrix cannot be factorized even after
/// jitter escalation.
class SynthesisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Largest grid the dense sampler accepts. Longer paths are produced in
/// independent blocks (see sample_path_blockwise); at this size one
/// factorization already costs O(n^3) ~ 2e10 flops.
inline constexpr std::size_t kMaxDenseGrid = 4096;

/// Exact Gaussian sampler for omega on a fixed grid.
///
/// The covariance matrix is assembled from the closed-form kernels and
/// factorized once (lower-triangular Cholesky); the factor is cached so
/// Monte-Carlo replicas on the same grid cost O(n^2) each. Grid points
/// with an empty cone (non-stationary, t < cutoff) are pinned to 0 and
/// excluded from the factorization.
///
/// Near-singular log kernels get a diagonal jitter escalating from
/// 1e-12*trace/n by factors of 10 up to 1e-6*trace/n before the sampler
/// gives up.
class DensePathSampler {
public:
    DensePathSampler(ModelKind kind, const TimeGrid& grid, const CascadeParams& params)
        : kind_(kind), grid_(grid), params_(params) {
        params_.validate();
        grid_.validate();
        if (kind == ModelKind::stationary) params_.require_integral_scale();
        if (grid_.n > kMaxDenseGrid)
            throw std::invalid_argument(
                "DensePathSampler: grid.n exceeds " + std::to_string(kMaxDenseGrid) +
                "; use sample_path_blockwise for longer paths");

        mean_.resize(grid_.n);
        for (std::size_t i = 0; i < grid_.n; ++i) {
            const double t = grid_.time(i);
            mean_[i] = cascade::mean(kind_, t, params_);
            if (cone_active(kind_, t, params_)) active_.push_back(i);
        }

        const auto m = static_cast<Eigen::Index>(active_.size());
        Eigen::MatrixXd cov_mat(m, m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double ti = grid_.time(active_[static_cast<std::size_t>(i)]);
            for (Eigen::Index j = 0; j <= i; ++j) {
                const double tj = grid_.time(active_[static_cast<std::size_t>(j)]);
                const double c = cov(kind_, ti, tj, params_);
                cov_mat(i, j) = c;
                cov_mat(j, i) = c;
            }
        }
        factorize(cov_mat);
    }

    /// One path from the given master seed (stream 0).
    GaussianLogVolPath sample(std::uint64_t seed) const { return sample_stream(seed, 0); }

    /// One path from replica stream `stream` of `seed`. Distinct streams
    /// are independent; identical (seed, stream) reproduce bit-identical
    /// values.
    GaussianLogVolPath sample_stream(std::uint64_t seed, std::uint64_t stream) const {
        auto rng = replica_rng(seed, stream);
        GaussianLogVolPath path = sample_with(rng);
        path.seed = SeedRecord{seed, stream};
        return path;
    }

    /// One path drawn from an externally managed engine.
    GaussianLogVolPath sample_with(std::mt19937_64& rng) const {
        GaussianLogVolPath path;
        path.grid = grid_;
        path.kind = kind_;
        path.params = params_;
        path.values.assign(grid_.n, 0.0);

        std::normal_distribution<double> normal(0.0, 1.0);
        if (!degenerate_) {
            const auto m = static_cast<Eigen::Index>(active_.size());
            Eigen::VectorXd z(m);
            for (Eigen::Index i = 0; i < m; ++i) z(i) = normal(rng);
            Eigen::VectorXd noise = chol_.triangularView<Eigen::Lower>() * z;
            for (Eigen::Index i = 0; i < m; ++i)
                path.values[active_[static_cast<std::size_t>(i)]] = noise(i);
        }
        for (std::size_t i = 0; i < grid_.n; ++i) path.values[i] += mean_[i];
        return path;
    }

    const TimeGrid& grid() const { return grid_; }
    double jitter_used() const { return jitter_; }
    bool degenerate() const { return degenerate_; }

private:
    void factorize(Eigen::MatrixXd& cov_mat) {
        const Eigen::Index m = cov_mat.rows();
        const double trace = cov_mat.trace();
        if (m == 0 || trace <= 0.0) {
            // lambda2 == 0 or no active point: the field is deterministic.
            degenerate_ = true;
            return;
        }
        const double base = trace / static_cast<double>(m);
        double jitter = 1e-12 * base;
        const double jitter_cap = 1e-6 * base;
        Eigen::MatrixXd attempt;
        while (true) {
            attempt = cov_mat;
            attempt.diagonal().array() += jitter;
            Eigen::LLT<Eigen::MatrixXd> llt(attempt);
            if (llt.info() == Eigen::Success) {
                chol_ = llt.matrixL();
                jitter_ = jitter;
                return;
            }
            if (jitter >= jitter_cap) break;
            jitter *= 10.0;
        }
        std::ostringstream msg;
        msg << "DensePathSampler: covariance factorization failed (n=" << m
            << ", jitter escalated to " << jitter << ", trace/n=" << base
            << ", diag range [" << cov_mat.diagonal().minCoeff() << ", "
            << cov_mat.diagonal().maxCoeff() << "])";
        throw SynthesisError(msg.str());
    }

    ModelKind kind_;
    TimeGrid grid_;
    CascadeParams params_;
    std::vector<std::size_t> active_;
    std::vector<double> mean_;
    Eigen::MatrixXd chol_;
    double jitter_ = 0.0;
    bool degenerate_ = false;
};

/// One exact Gaussian path of omega. Convenience wrapper that builds the
/// sampler, draws once and discards the factor; Monte-Carlo loops should
/// hold a DensePathSampler instead.
inline GaussianLogVolPath sample_path(ModelKind kind, const TimeGrid& grid,
                                      const CascadeParams& params, std::uint64_t seed) {
    return DensePathSampler(kind, grid, params).sample(seed);
}

/// Long paths assembled from independent dense blocks of `block_n`
/// points. Covariance across blocks is discarded, which is acceptable
/// when the block length is >= 8x the largest lag that will be analyzed;
/// within a block the synthesis is exact. Block b uses replica stream b
/// of `seed`.
inline GaussianLogVolPath sample_path_blockwise(ModelKind kind, const TimeGrid& grid,
                                                const CascadeParams& params, std::uint64_t seed,
                                                std::size_t block_n) {
    grid.validate();
    if (block_n < 1 || block_n > kMaxDenseGrid)
        throw std::invalid_argument("sample_path_blockwise: block_n must be in [1, " +
                                    std::to_string(kMaxDenseGrid) + "]");
    GaussianLogVolPath path;
    path.grid = grid;
    path.kind = kind;
    path.params = params;
    path.seed = SeedRecord{seed, 0};
    path.values.reserve(grid.n);

    std::uint64_t block = 0;
    for (std::size_t start = 0; start < grid.n; start += block_n, ++block) {
        TimeGrid sub{grid.time(start), grid.dt, std::min(block_n, grid.n - start)};
        DensePathSampler sampler(kind, sub, params);
        GaussianLogVolPath piece = sampler.sample_stream(seed, block);
        path.values.insert(path.values.end(), piece.values.begin(), piece.values.end());
    }
    return path;
}

}  // namespace cascade
