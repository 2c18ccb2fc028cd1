// Command-line front end: simulate cascade paths, reproduce the standard
// experiments, and analyze OHLC market data.
//
// Exit codes: 0 success, 2 usage/validation error, 3 runtime/numeric error.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <cascade/cascade.hpp>
#include <cascade/experiments.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct CliConfig {
    std::string command;
    std::string model = "nonstationary";
    std::string figure;
    std::optional<double> lambda2{};
    std::optional<double> integral_scale{};
    double ell = 1.0;
    double sigma2 = 1.0;
    std::optional<std::size_t> n{};
    double dt = 1.0;
    std::optional<std::size_t> reps{};
    std::optional<std::uint64_t> seed{};
    std::vector<double> delta_t{16, 32, 64, 128, 256, 512};
    std::vector<double> q{};
    std::string proxy = "log-range";
    std::string out_dir;
    std::string format = "csv";
    std::string input_file;
};

json to_json(const CliConfig& cfg) {
    json j;
    j["command"] = cfg.command;
    if (cfg.command == "simulate") j["model"] = cfg.model;
    if (!cfg.figure.empty()) j["figure"] = cfg.figure;
    if (cfg.lambda2) j["lambda2"] = *cfg.lambda2;
    if (cfg.integral_scale) j["T"] = *cfg.integral_scale;
    j["ell"] = cfg.ell;
    j["sigma2"] = cfg.sigma2;
    if (cfg.n) j["n"] = *cfg.n;
    j["dt"] = cfg.dt;
    if (cfg.reps) j["reps"] = *cfg.reps;
    if (cfg.seed) j["seed"] = *cfg.seed;
    j["delta_t"] = cfg.delta_t;
    if (!cfg.q.empty()) j["q"] = cfg.q;
    j["proxy"] = cfg.proxy;
    j["out"] = cfg.out_dir;
    j["format"] = cfg.format;
    if (!cfg.input_file.empty()) j["input"] = cfg.input_file;
    j["version"] = cascade::kVersion;
    return j;
}

// Values from --config seed the defaults; explicit flags override them.
void apply_config_file(const std::string& path, CliConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument("bad config file " + path + ": " + e.what());
    }
    if (j.contains("model")) cfg.model = j["model"].get<std::string>();
    if (j.contains("lambda2")) cfg.lambda2 = j["lambda2"].get<double>();
    if (j.contains("T")) cfg.integral_scale = j["T"].get<double>();
    if (j.contains("ell")) cfg.ell = j["ell"].get<double>();
    if (j.contains("sigma2")) cfg.sigma2 = j["sigma2"].get<double>();
    if (j.contains("n")) cfg.n = j["n"].get<std::size_t>();
    if (j.contains("dt")) cfg.dt = j["dt"].get<double>();
    if (j.contains("reps")) cfg.reps = j["reps"].get<std::size_t>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("delta_t")) cfg.delta_t = j["delta_t"].get<std::vector<double>>();
    if (j.contains("q")) cfg.q = j["q"].get<std::vector<double>>();
    if (j.contains("proxy")) cfg.proxy = j["proxy"].get<std::string>();
    if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
    if (j.contains("format")) cfg.format = j["format"].get<std::string>();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

fs::path prepare_out_dir(CliConfig& cfg, const std::string& fallback) {
    if (cfg.out_dir.empty()) cfg.out_dir = fallback;
    fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    write_text(dir / "config.json", to_json(cfg).dump(2) + "\n");
    return dir;
}

std::uint64_t require_seed(const CliConfig& cfg) {
    if (!cfg.seed) throw std::invalid_argument("--seed is required for stochastic commands");
    return *cfg.seed;
}

// ---------------------------------------------------------------------------

int cmd_simulate(CliConfig cfg) {
    const auto kind = cfg.model == "stationary" ? cascade::ModelKind::stationary
                                                : cascade::ModelKind::nonstationary;
    cascade::CascadeParams params{cfg.lambda2.value_or(1.0), cfg.integral_scale, cfg.ell,
                                  cfg.sigma2};
    if (kind == cascade::ModelKind::stationary && !params.integral_scale)
        throw std::invalid_argument("the stationary model requires --T");
    if (kind == cascade::ModelKind::nonstationary) params.integral_scale.reset();
    params.validate();
    const std::uint64_t seed = require_seed(cfg);
    const cascade::TimeGrid grid{0.0, cfg.dt, cfg.n.value_or(500)};
    grid.validate();
    const fs::path dir = prepare_out_dir(cfg, "out-simulate");

    const auto path =
        grid.n <= cascade::kMaxDenseGrid
            ? cascade::sample_path(kind, grid, params, seed)
            : cascade::sample_path_blockwise(kind, grid, params, seed, cascade::kMaxDenseGrid);
    const auto measure = cascade::build_measure(path);
    const auto walk = cascade::build_mrw(measure, seed, /*stream=*/1u << 20);

    {
        std::ofstream out(dir / "omega.csv", std::ios::binary);
        cascade::write_omega_csv(out, path);
    }
    {
        std::ofstream out(dir / "measure.csv", std::ios::binary);
        cascade::write_measure_csv(out, measure);
    }
    {
        std::ofstream out(dir / "mrw.csv", std::ios::binary);
        cascade::write_mrw_csv(out, walk);
    }

    if (!cfg.q.empty()) {
        std::vector<double> taus;
        for (std::size_t k = 4; k <= grid.n / 8; k *= 2)
            taus.push_back(cfg.dt * static_cast<double>(k));
        if (taus.size() >= 2) {
            const auto sf = cascade::structure_functions(measure, cfg.q, taus);
            json j;
            j["q"] = sf.moments.orders;
            j["tau"] = sf.moments.lags;
            j["moments"] = sf.moments.values;
            j["zeta_hat"] = sf.zeta_hat;
            j["zeta_stderr"] = sf.zeta_se;
            j["c_q"] = sf.c_q;
            j["kurtosis"] = sf.kurtosis;
            const double bound = cascade::integral_scale_bound(sf);
            j["integral_scale_bound"] = std::isinf(bound) ? json(nullptr) : json(bound);
            write_text(dir / "structure.json", j.dump(2) + "\n");
        }
    }

    double mean = 0.0, var = 0.0;
    for (double v : path.values) mean += v;
    mean /= static_cast<double>(path.values.size());
    for (double v : path.values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(path.values.size());
    std::cout << "omega: mean=" << mean << " var=" << var << '\n';
    const double horizon = grid.t_max() - grid.t0;
    if (horizon > 0.0)
        std::cout << "measure: M(t_end)/(sigma2*t_end)="
                  << measure.cumulative.back() / (params.sigma2 * horizon) << '\n';
    std::cout << "wrote " << dir.string() << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

void write_aging_covariance(const fs::path& dir,
                            const cascade::experiments::AgingCovarianceResult& r) {
    std::string csv = "t2,lag,empirical,stderr,theory\n";
    for (const auto& curve : r.curves)
        for (std::size_t i = 0; i < curve.lag.size(); ++i)
            csv += cascade::format_double(curve.t2) + ',' + cascade::format_double(curve.lag[i]) +
                   ',' + cascade::format_double(curve.empirical[i]) + ',' +
                   cascade::format_double(curve.se[i]) + ',' +
                   cascade::format_double(curve.theory[i]) + '\n';
    write_text(dir / "fig4_curves.csv", csv);
    json j;
    j["fraction_within_3se"] = r.fraction_within;
    j["pass"] = r.pass;
    write_text(dir / "fig4_summary.json", j.dump(2) + "\n");
}

void write_aging_variance(const fs::path& dir, const cascade::experiments::AgingVarianceResult& r) {
    std::string csv = "t,var_empirical,stderr,var_theory\n";
    for (std::size_t i = 0; i < r.t.size(); ++i)
        csv += cascade::format_double(r.t[i]) + ',' + cascade::format_double(r.var_empirical[i]) +
               ',' + cascade::format_double(r.se[i]) + ',' +
               cascade::format_double(r.var_theory[i]) + '\n';
    write_text(dir / "fig5_curve.csv", csv);
    json j;
    j["slope"] = r.slope;
    j["intercept"] = r.intercept;
    j["pass_slope"] = r.pass_slope;
    j["pass_intercept"] = r.pass_intercept;
    j["pass"] = r.pass;
    write_text(dir / "fig5_summary.json", j.dump(2) + "\n");
}

void write_covariance_curves(const fs::path& dir, const std::string& stem,
                             const cascade::experiments::MagnitudeCovarianceCurves& curves,
                             std::optional<std::uint64_t> seed) {
    for (std::size_t c = 0; c < curves.estimates.size(); ++c) {
        const auto& est = curves.estimates[c];
        std::string csv = "lag,value,stderr,theory\n";
        for (std::size_t i = 0; i < est.lags.size(); ++i) {
            csv += cascade::format_double(est.lags[i]) + ',' +
                   cascade::format_double(est.values[i]) + ',' +
                   (i < est.se.size() ? cascade::format_double(est.se[i]) : std::string{}) + ',' +
                   (i == 0 ? std::string{} : cascade::format_double(curves.theory[c][i])) + '\n';
        }
        const auto tag = std::to_string(static_cast<long long>(est.delta_t));
        write_text(dir / (stem + "_cov_dt" + tag + ".csv"), csv);
        cascade::EstimateMeta meta{est.delta_t, est.n_subsamples, seed};
        write_text(dir / (stem + "_cov_dt" + tag + ".json"),
                   cascade::covariance_to_json(est, std::nullopt, meta).dump(2) + "\n");
    }
}

void write_scan(const fs::path& dir, const std::string& stem,
                const cascade::experiments::ApparentScaleResult& scan) {
    std::string csv = "delta_t,lambda2_hat,T_hat,T_stderr,n_windows,degenerate\n";
    for (const auto& row : scan.rows) {
        csv += cascade::format_double(row.delta_t) + ',' +
               cascade::format_double(row.lambda2_hat) + ',' +
               (row.T_hat ? cascade::format_double(*row.T_hat) : std::string{}) + ',' +
               (row.T_stderr ? cascade::format_double(*row.T_stderr) : std::string{}) + ',' +
               std::to_string(row.n_windows) + ',' + (row.degenerate ? "1" : "0") + '\n';
    }
    write_text(dir / (stem + "_scan.csv"), csv);
    json j;
    j["slope"] = scan.slope;
    j["mean_offset"] = scan.mean_offset;
    j["expected_offset"] = -1.5;
    j["pass_slope"] = scan.pass_slope;
    j["pass_offset"] = scan.pass_offset;
    j["pass"] = scan.pass;
    write_text(dir / (stem + "_summary.json"), j.dump(2) + "\n");
}

int cmd_reproduce(CliConfig cfg) {
    const std::uint64_t seed = require_seed(cfg);
    const fs::path dir = prepare_out_dir(cfg, "out-" + cfg.figure);

    if (cfg.figure == "fig4") {
        cascade::experiments::AgingCovarianceConfig ecfg;
        ecfg.lambda2 = cfg.lambda2.value_or(1.0);
        ecfg.ell = cfg.ell;
        ecfg.n = cfg.n.value_or(500);
        ecfg.reps = cfg.reps.value_or(500);
        ecfg.seed = seed;
        const auto result = cascade::experiments::run_aging_covariance(ecfg);
        write_aging_covariance(dir, result);
        std::cout << "fig4: fraction within 3 se = " << result.fraction_within
                  << (result.pass ? " PASS" : " FAIL") << '\n';
        return 0;
    }
    if (cfg.figure == "fig5") {
        cascade::experiments::AgingVarianceConfig ecfg;
        ecfg.lambda2 = cfg.lambda2.value_or(1.0);
        ecfg.ell = cfg.ell;
        ecfg.n = cfg.n.value_or(500);
        ecfg.reps = cfg.reps.value_or(500);
        ecfg.seed = seed;
        const auto result = cascade::experiments::run_aging_variance(ecfg);
        write_aging_variance(dir, result);
        std::cout << "fig5: slope=" << result.slope << " intercept=" << result.intercept
                  << (result.pass ? " PASS" : " FAIL") << '\n';
        return 0;
    }
    if (cfg.figure == "fig6c" || cfg.figure == "fig8") {
        cascade::experiments::SyntheticSeriesConfig scfg;
        scfg.lambda2 = cfg.lambda2.value_or(0.01);
        scfg.ell = cfg.ell;
        scfg.length = cfg.n.value_or(20480);
        scfg.seed = seed;
        double max_dt = 0.0;
        for (double d : cfg.delta_t) max_dt = std::max(max_dt, d);
        scfg.block_n = std::min<std::size_t>(
            cascade::kMaxDenseGrid, static_cast<std::size_t>(8.0 * max_dt / scfg.ell));
        const auto synth = cascade::experiments::synthesize_magnitude(scfg);
        {
            std::ofstream out(dir / "magnitude.csv", std::ios::binary);
            out << "t,omega_h\n";
            for (std::size_t k = 0; k < synth.magnitude.size(); ++k)
                out << cascade::format_double(synth.magnitude.origin +
                                              static_cast<double>(k) * synth.magnitude.h)
                    << ',' << cascade::format_double(synth.magnitude.values[k]) << '\n';
        }
        if (cfg.figure == "fig6c") {
            cascade::experiments::MagnitudeCovarianceScanConfig ccfg;
            ccfg.delta_t = cfg.delta_t;
            ccfg.lambda2_theory = scfg.lambda2;
            const auto curves = cascade::experiments::run_covariance_curves(synth.magnitude, ccfg);
            write_covariance_curves(dir, "fig6c", curves, seed);
            json j;
            j["fraction_within_3se"] = curves.fraction_within;
            j["pass"] = curves.pass;
            write_text(dir / "fig6c_summary.json", j.dump(2) + "\n");
            std::cout << "fig6c: fraction within 3 se = " << curves.fraction_within
                      << (curves.pass ? " PASS" : " FAIL") << '\n';
        } else {
            const auto scan = cascade::experiments::run_apparent_scale_scan(synth.magnitude, cfg.delta_t);
            write_scan(dir, "fig8", scan);
            std::cout << "fig8: slope=" << scan.slope << " offset=" << scan.mean_offset
                      << " (theory -1.5)" << (scan.pass ? " PASS" : " FAIL") << '\n';
        }
        return 0;
    }
    throw std::invalid_argument("unknown figure tag: " + cfg.figure);
}

// ---------------------------------------------------------------------------

int cmd_analyze(CliConfig cfg) {
    std::ifstream in(cfg.input_file);
    if (!in) throw std::invalid_argument("cannot open input file: " + cfg.input_file);
    const auto parsed = cascade::parse_ohlc(in);
    const fs::path dir = prepare_out_dir(cfg, "out-analyze");
    for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << '\n';
    if (!parsed.errors.empty()) {
        std::cerr << parsed.errors.size() << " rows rejected";
        for (std::size_t i = 0; i < std::min<std::size_t>(parsed.errors.size(), 5); ++i)
            std::cerr << "\n  " << parsed.errors[i];
        std::cerr << '\n';
    }

    cascade::experiments::AnalyzeConfig acfg;
    acfg.delta_t = cfg.delta_t;
    acfg.proxy = cascade::range_proxy_from_string(cfg.proxy);
    acfg.lambda2 = cfg.lambda2;
    const auto result = cascade::experiments::run_analyze(parsed.records, acfg);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';

    {
        std::ofstream out(dir / "magnitude.csv", std::ios::binary);
        cascade::write_daily_magnitude_csv(out, result.daily.dates, result.daily.values);
    }
    write_covariance_curves(dir, "analyze", result.curves, std::nullopt);
    write_scan(dir, "analyze", result.scan);

    json report;
    report["proxy"] = cascade::to_string(result.daily.proxy);
    report["n_days"] = result.daily.values.size();
    report["rows_rejected"] = parsed.errors.size();
    report["skipped_zero_range"] = result.daily.skipped_zero_range;
    report["lambda2_used"] = result.lambda2_used;
    report["lambda2_fitted"] = result.lambda2_fitted;
    report["scan_slope"] = result.scan.slope;
    report["scan_mean_offset"] = result.scan.mean_offset;
    json ratio = json::array();
    for (const auto& row : result.scan.rows)
        ratio.push_back(row.T_hat ? json(*row.T_hat / row.delta_t) : json(nullptr));
    report["T_hat_over_delta_t"] = ratio;
    write_text(dir / "report.json", report.dump(2) + "\n");

    std::cout << "analyze: n_days=" << result.daily.values.size()
              << " lambda2_used=" << result.lambda2_used << " scan_slope=" << result.scan.slope
              << " mean ln(T/dt)=" << result.scan.mean_offset << '\n';
    std::cout << "wrote " << dir.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CliConfig cfg;
    std::string config_path;

    // --config is applied before the flag parse so explicit flags win.
    for (int i = 1; i < argc; ++i) {
        const std::string_view arg(argv[i]);
        if (arg == "--config" && i + 1 < argc) config_path = argv[i + 1];
        else if (arg.starts_with("--config=")) config_path = std::string(arg.substr(9));
    }

    CLI::App app{"log-normal continuous cascade toolkit"};
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file; flags override its values");
        sub->add_option("--lambda2", cfg.lambda2, "intermittency coefficient");
        sub->add_option("--T", cfg.integral_scale, "integral scale (stationary model)");
        sub->add_option("--ell", cfg.ell, "small-scale cutoff");
        sub->add_option("--sigma2", cfg.sigma2, "variance scale");
        sub->add_option("--n", cfg.n, "number of grid points / series length");
        sub->add_option("--dt", cfg.dt, "grid step");
        sub->add_option("--reps", cfg.reps, "Monte-Carlo replicas");
        sub->add_option("--seed", cfg.seed, "master RNG seed");
        sub->add_option("--delta-t", cfg.delta_t, "window lengths (comma list)")->delimiter(',');
        sub->add_option("--q", cfg.q, "moment orders (comma list)")->delimiter(',');
        sub->add_option("--proxy", cfg.proxy, "range proxy: log-range|relative-range")
            ->check(CLI::IsMember({"log-range", "relative-range"}));
        sub->add_option("--out", cfg.out_dir, "output directory");
        sub->add_option("--format", cfg.format, "output format")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    auto* simulate = app.add_subcommand("simulate", "sample one path: omega, M and X = B[M]");
    simulate->add_option("--model", cfg.model, "stationary|nonstationary")
        ->check(CLI::IsMember({"stationary", "nonstationary"}));
    add_common(simulate);

    auto* reproduce =
        app.add_subcommand("reproduce", "run a predefined experiment (fig4|fig5|fig6c|fig8)");
    reproduce->add_option("figure", cfg.figure, "experiment tag")->required();
    add_common(reproduce);

    auto* analyze = app.add_subcommand("analyze", "OHLC file -> magnitude covariance scan");
    analyze->add_option("file", cfg.input_file, "OHLC input file")->required();
    add_common(analyze);

    try {
        if (!config_path.empty()) apply_config_file(config_path, cfg);
        app.parse(argc, argv);

        if (simulate->parsed()) {
            cfg.command = "simulate";
            return cmd_simulate(cfg);
        }
        if (reproduce->parsed()) {
            cfg.command = "reproduce " + cfg.figure;
            return cmd_reproduce(cfg);
        }
        cfg.command = "analyze";
        return cmd_analyze(cfg);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
