#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "cascade/kernels.hpp"
#include "cascade/params.hpp"
#include "cascade/rng.hpp"

namespace cascade {

/// Time-scale discretization sampler for omega.
///
/// The half-plane between the cutoff and s_max is tiled with cells:
/// logarithmic scale layers s_k = cutoff * 2^(k / scale_resolution) and,
/// within layer k, uniform time cells of width min(s_k, dt)/2. A cell
/// holds an independent centered Gaussian of variance
/// lambda2 * s^-2 * du * ds evaluated at the cell center, and omega(t)
/// sums the cells whose center lies in the cone of t. Scales above
/// s_max = max grid time (stationary: s_max = T), where every cone's
/// cross-section no longer depends on s, are integrated exactly as a
/// Brownian tail, so the only approximation is the cell tiling itself.
///
/// The mean is -1/2 of the discretized variance, which keeps
/// E[exp(omega)] = 1 under the discretization; both converge to the
/// closed forms as scale_resolution grows.
///
/// Several coupled cutoff levels may be requested: levels share all
/// cells with s >= level, so refining the cutoff only adds cells below
/// it. This is what the measure-convergence diagnostic needs. Levels
/// must be decreasing and aligned with the layer grid (each level a
/// power of 2^(1/scale_resolution) times the finest).
class ConeSampler {
public:
    /// Cells above this count are refused.
    static constexpr std::size_t kMaxCells = std::size_t{1} << 26;

    ConeSampler(ModelKind kind, const TimeGrid& grid, const CascadeParams& params,
                int scale_resolution, std::vector<double> levels = {})
        : kind_(kind), grid_(grid), params_(params), resolution_(scale_resolution),
          levels_(std::move(levels)) {
        params_.validate();
        grid_.validate();
        if (resolution_ < 4)
            throw std::invalid_argument(
                "ConeSampler: scale_resolution below 4 subdivisions per octave is too coarse");
        if (levels_.empty()) levels_ = {params_.cutoff};
        for (std::size_t i = 0; i + 1 < levels_.size(); ++i)
            if (!(levels_[i] >= levels_[i + 1]))
                throw std::invalid_argument("ConeSampler: levels must be non-increasing");
        if (!(levels_.back() > 0.0)) throw std::invalid_argument("ConeSampler: levels must be > 0");
        for (const double level : levels_) {
            const double k = std::log2(level / levels_.back()) * resolution_;
            if (std::abs(k - std::round(k)) > 1e-9)
                throw std::invalid_argument(
                    "ConeSampler: every level must sit on the layer grid "
                    "(a power of 2^(1/scale_resolution) times the finest level)");
        }

        const double ell = levels_.back();
        if (kind_ == ModelKind::stationary) {
            const double T = params_.require_integral_scale();
            s_max_ = T;
            u_lo_ = grid_.t0 - T;
        } else {
            s_max_ = grid_.t_max();
            u_lo_ = 0.0;
        }

        // Layer boundaries; the top layer is clipped at s_max.
        double s = ell;
        std::size_t total = 0;
        for (int k = 0; s < s_max_ * (1.0 - 1e-14); ++k) {
            const double s_next = std::min(ell * std::pow(2.0, (k + 1) / double(resolution_)), s_max_);
            Layer layer;
            layer.s_lo = s;
            layer.s_mid = 0.5 * (s + s_next);
            layer.ds = s_next - s;
            layer.width = 0.5 * std::min(s, grid_.dt);
            layer.n_cells = static_cast<std::size_t>(
                std::ceil((grid_.t_max() - u_lo_) / layer.width - 1e-12));
            layer.cell_var = params_.lambda2 * layer.ds * layer.width /
                             (layer.s_mid * layer.s_mid);
            layer.offset = total;
            total += layer.n_cells;
            if (total > kMaxCells)
                throw std::runtime_error("ConeSampler: cell count exceeds memory cap");
            layers_.push_back(layer);
            s = s_next;
        }
        total_cells_ = total;

        // First layer each level sees (levels align with layer edges).
        level_start_.resize(levels_.size());
        for (std::size_t li = 0; li < levels_.size(); ++li) {
            std::size_t k = 0;
            while (k < layers_.size() && layers_[k].s_lo < levels_[li] * (1.0 - 1e-9)) ++k;
            level_start_[li] = k;
        }

        // Brownian tail sample times: grid times, plus their T-shifted
        // companions for the stationary sliding window, plus the origin.
        tail_times_.reserve(2 * grid_.n + 1);
        if (kind_ == ModelKind::nonstationary) tail_times_.push_back(0.0);
        for (std::size_t i = 0; i < grid_.n; ++i) {
            tail_times_.push_back(grid_.time(i));
            if (kind_ == ModelKind::stationary)
                tail_times_.push_back(grid_.time(i) - *params_.integral_scale);
        }
        std::sort(tail_times_.begin(), tail_times_.end());
        tail_times_.erase(std::unique(tail_times_.begin(), tail_times_.end()), tail_times_.end());
    }

    std::size_t total_cells() const { return total_cells_; }
    const std::vector<double>& levels() const { return levels_; }

    /// Paths for every coupled level, sharing one noise draw.
    std::vector<GaussianLogVolPath> sample_all(std::uint64_t seed, std::uint64_t stream = 0) const {
        auto rng = replica_rng(seed, stream);
        return sample_all_with(rng, SeedRecord{seed, stream});
    }

    std::vector<GaussianLogVolPath> sample_all_with(std::mt19937_64& rng,
                                                    SeedRecord rec = {}) const {
        std::normal_distribution<double> normal(0.0, 1.0);

        // Prefix sums of cell noise, layer-major; cells are consumed from
        // the engine in a fixed order so output is seed-deterministic.
        std::vector<double> prefix(total_cells_ + layers_.size());
        {
            std::size_t pos = 0;
            for (const Layer& layer : layers_) {
                const double sd = std::sqrt(layer.cell_var);
                prefix[pos] = 0.0;
                for (std::size_t j = 0; j < layer.n_cells; ++j, ++pos)
                    prefix[pos + 1] = prefix[pos] + sd * normal(rng);
                ++pos;
            }
        }

        // Brownian tail over scales >= s_max, variance rate lambda2/s_max.
        std::vector<double> tail(tail_times_.size(), 0.0);
        const double rate = params_.lambda2 / s_max_;
        for (std::size_t i = 1; i < tail_times_.size(); ++i) {
            const double dt_i = tail_times_[i] - tail_times_[i - 1];
            tail[i] = tail[i - 1] + std::sqrt(rate * dt_i) * normal(rng);
        }

        std::vector<GaussianLogVolPath> out(levels_.size());
        for (std::size_t li = 0; li < levels_.size(); ++li) {
            CascadeParams level_params = params_;
            level_params.cutoff = levels_[li];
            GaussianLogVolPath& path = out[li];
            path.grid = grid_;
            path.kind = kind_;
            path.params = level_params;
            path.seed = rec;
            path.values.assign(grid_.n, 0.0);

            for (std::size_t i = 0; i < grid_.n; ++i) {
                const double t = grid_.time(i);
                if (!cone_active(kind_, t, level_params)) continue;
                double noise = 0.0;
                double var = 0.0;
                for (std::size_t k = level_start_[li]; k < layers_.size(); ++k) {
                    const Layer& layer = layers_[k];
                    const double lo = kind_ == ModelKind::stationary
                                          ? t - std::min(layer.s_mid, s_max_)
                                          : std::max(0.0, t - layer.s_mid);
                    const auto [j_lo, j_hi] = cell_range(layer, lo, t);
                    if (j_lo > j_hi) continue;
                    const std::size_t base = layer.offset + static_cast<std::size_t>(k);
                    noise += prefix[base + j_hi + 1] - prefix[base + j_lo];
                    var += static_cast<double>(j_hi - j_lo + 1) * layer.cell_var;
                }
                noise += tail_at(tail, t);
                var += tail_var(t);
                path.values[i] = -0.5 * var + noise;
            }
        }
        return out;
    }

    /// Single-level convenience draw (the coarsest requested level).
    GaussianLogVolPath sample(std::uint64_t seed, std::uint64_t stream = 0) const {
        return sample_all(seed, stream).front();
    }

private:
    struct Layer {
        double s_lo, s_mid, ds, width, cell_var;
        std::size_t n_cells, offset;
    };

    std::pair<std::size_t, std::size_t> cell_range(const Layer& layer, double lo, double hi) const {
        // Cells whose center u_j = u_lo + (j + 1/2) * width lies in [lo, hi].
        double a = std::ceil((lo - u_lo_) / layer.width - 0.5);
        double b = std::floor((hi - u_lo_) / layer.width - 0.5);
        a = std::max(a, 0.0);
        b = std::min(b, static_cast<double>(layer.n_cells - 1));
        if (a > b) return {1, 0};
        return {static_cast<std::size_t>(a), static_cast<std::size_t>(b)};
    }

    double tail_at(const std::vector<double>& tail, double t) const {
        const auto it = std::lower_bound(tail_times_.begin(), tail_times_.end(), t);
        const auto idx = static_cast<std::size_t>(it - tail_times_.begin());
        if (kind_ == ModelKind::nonstationary) return tail[idx];
        const double t_from = t - *params_.integral_scale;
        const auto it2 = std::lower_bound(tail_times_.begin(), tail_times_.end(), t_from);
        return tail[idx] - tail[static_cast<std::size_t>(it2 - tail_times_.begin())];
    }

    double tail_var(double t) const {
        const double width = kind_ == ModelKind::stationary ? *params_.integral_scale : t;
        return params_.lambda2 * width / s_max_;
    }

    ModelKind kind_;
    TimeGrid grid_;
    CascadeParams params_;
    int resolution_;
    std::vector<double> levels_;
    std::vector<std::size_t> level_start_;
    std::vector<Layer> layers_;
    std::vector<double> tail_times_;
    double s_max_ = 0.0;
    double u_lo_ = 0.0;
    std::size_t total_cells_ = 0;
};

/// One path from the time-scale discretization sampler. Cross-check
/// companion to sample_path; statistics converge to the closed-form
/// kernels as scale_resolution grows.
inline GaussianLogVolPath sample_path_cone(ModelKind kind, const TimeGrid& grid,
                                           const CascadeParams& params, std::uint64_t seed,
                                           int scale_resolution) {
    return ConeSampler(kind, grid, params, scale_resolution).sample(seed);
}

}  // namespace cascade
