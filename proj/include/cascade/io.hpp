#pragma once

#include <charconv>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cascade/estimators.hpp"
#include "cascade/fits.hpp"
#include "cascade/params.hpp"

namespace cascade {

/// Shortest decimal representation that round-trips the double exactly.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, ptr);
}

namespace detail {

inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::runtime_error("csv: bad numeric field '" + std::string(s) + "'");
    return v;
}

inline void write_series_csv(std::ostream& out, std::string_view header,
                             std::span<const double> t, std::span<const double> y) {
    out << header << '\n';
    for (std::size_t i = 0; i < t.size(); ++i)
        out << format_double(t[i]) << ',' << format_double(y[i]) << '\n';
}

inline std::pair<std::vector<double>, std::vector<double>> read_series_csv(
    std::istream& in, std::string_view expected_header) {
    std::string line;
    if (!std::getline(in, line) || (line.ends_with("\r") ? line.substr(0, line.size() - 1)
                                                         : line) != expected_header)
        throw std::runtime_error("csv: expected header '" + std::string(expected_header) + "'");
    std::vector<double> t, y;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto pos = line.find(',');
        if (pos == std::string::npos) throw std::runtime_error("csv: malformed row '" + line + "'");
        t.push_back(parse_double(std::string_view(line).substr(0, pos)));
        y.push_back(parse_double(std::string_view(line).substr(pos + 1)));
    }
    return {std::move(t), std::move(y)};
}

}  // namespace detail

inline void write_omega_csv(std::ostream& out, const GaussianLogVolPath& path) {
    std::vector<double> t(path.grid.n);
    for (std::size_t i = 0; i < path.grid.n; ++i) t[i] = path.grid.time(i);
    detail::write_series_csv(out, "t,omega", t, path.values);
}

inline void write_measure_csv(std::ostream& out, const MeasurePath& m) {
    std::vector<double> t(m.grid.n);
    for (std::size_t i = 0; i < m.grid.n; ++i) t[i] = m.grid.time(i);
    detail::write_series_csv(out, "t,M", t, m.cumulative);
}

inline void write_mrw_csv(std::ostream& out, const MrwPath& x) {
    std::vector<double> t(x.grid.n);
    for (std::size_t i = 0; i < x.grid.n; ++i) t[i] = x.grid.time(i);
    detail::write_series_csv(out, "t,X", t, x.values);
}

inline std::pair<std::vector<double>, std::vector<double>> read_omega_csv(std::istream& in) {
    return detail::read_series_csv(in, "t,omega");
}
inline std::pair<std::vector<double>, std::vector<double>> read_measure_csv(std::istream& in) {
    return detail::read_series_csv(in, "t,M");
}
inline std::pair<std::vector<double>, std::vector<double>> read_mrw_csv(std::istream& in) {
    return detail::read_series_csv(in, "t,X");
}

struct EstimateMeta {
    double delta_t = 0.0;
    std::size_t n_subsamples = 1;
    std::optional<std::uint64_t> seed{};
};

/// JSON form of a covariance estimate with an optional fit:
/// {lags, values, stderr, fit:{lambda2, T, residual_rms}, meta:{delta_t,
/// n_subsamples, seed}}. T is null for degenerate fits.
inline nlohmann::json covariance_to_json(const CovarianceEstimate& est,
                                         const std::optional<ScalingFit>& fit,
                                         const EstimateMeta& meta) {
    nlohmann::json j;
    j["lags"] = est.lags;
    j["values"] = est.values;
    j["stderr"] = est.se;
    if (fit) {
        j["fit"] = {{"lambda2", fit->lambda2_hat},
                    {"T", fit->T_hat ? nlohmann::json(*fit->T_hat) : nlohmann::json(nullptr)},
                    {"residual_rms", fit->residual_rms}};
    }
    j["meta"] = {{"delta_t", meta.delta_t}, {"n_subsamples", meta.n_subsamples}};
    if (meta.seed) j["meta"]["seed"] = *meta.seed;
    return j;
}

inline CovarianceEstimate covariance_from_json(const nlohmann::json& j) {
    CovarianceEstimate est;
    est.lags = j.at("lags").get<std::vector<double>>();
    est.values = j.at("values").get<std::vector<double>>();
    est.se = j.at("stderr").get<std::vector<double>>();
    est.delta_t = j.at("meta").at("delta_t").get<double>();
    est.n_subsamples = j.at("meta").at("n_subsamples").get<std::size_t>();
    return est;
}

/// CSV mirror of the JSON estimate: one row per lag.
inline void write_covariance_csv(std::ostream& out, const CovarianceEstimate& est) {
    out << "lag,value,stderr\n";
    for (std::size_t i = 0; i < est.lags.size(); ++i) {
        out << format_double(est.lags[i]) << ',' << format_double(est.values[i]) << ',';
        if (i < est.se.size()) out << format_double(est.se[i]);
        out << '\n';
    }
}

/// Daily magnitude output: k,date,omega.
inline void write_daily_magnitude_csv(std::ostream& out, const std::vector<std::string>& dates,
                                      std::span<const double> omega) {
    out << "k,date,omega\n";
    for (std::size_t k = 0; k < omega.size(); ++k)
        out << k << ',' << dates[k] << ',' << format_double(omega[k]) << '\n';
}

}  // namespace cascade
