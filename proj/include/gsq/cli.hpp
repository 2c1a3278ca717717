#pragma once

#include "gsq/config_io.hpp"
#include "gsq/oracles.hpp"
#include "gsq/qbd.hpp"
#include "gsq/report.hpp"
#include "gsq/simulation.hpp"
#include "gsq/sweep.hpp"
#include "gsq/validate_suites.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace gsq::cli {

// Exit codes: 0 success, 1 validation/check failure, 2 usage or I/O error.
constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

namespace detail {

inline int fail_usage(const std::string& msg) {
    std::cerr << "error: " << msg << "\n";
    return kUsage;
}

inline SystemConfig load_validated(const std::string& path, int& code) {
    code = kOk;
    if (!std::filesystem::exists(path)) {
        std::cerr << "error: config not found: " << path << "\n";
        code = kUsage;
        return {};
    }
    SystemConfig config;
    try {
        config = load_config_file(path);
    } catch (const ConfigParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        code = kUsage;
        return {};
    }
    const ValidationResult v = validate(config);
    if (!v.ok()) {
        std::cerr << "invalid configuration:\n";
        for (const auto& msg : v.violations) std::cerr << "  - " << msg << "\n";
        code = kFailure;
    }
    return config;
}

inline bool write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot write " << path << "\n";
        return false;
    }
    out << content;
    return true;
}

inline std::string trajectory_csv(const RunStats& run) {
    std::ostringstream out;
    out << "time,event_kind,group,system_count,buffer_count,power_rate\n";
    for (const auto& p : run.trajectory) {
        out << format_real(p.time) << ',' << to_string(p.kind) << ',' << p.group << ','
            << p.system_count << ',' << p.buffer_count << ',' << format_real(p.power_rate)
            << "\n";
    }
    return out.str();
}

}  // namespace detail

/// State table plus summary block for the two-group analytic model.
inline std::string analyze_csv(const QbdModel& model, const Eigen::VectorXd& pi,
                               const Eigen::VectorXd& f, const std::vector<double>& xs,
                               int max_moment, double tolerance = 1e-12) {
    std::ostringstream out;
    out << "level,phase,i,l1,j,pi,f\n";
    for (std::size_t level = 0; level < model.levels.size(); ++level) {
        for (std::size_t phase = 0; phase < model.levels[level].size(); ++phase) {
            const int flat = model.level_offset[level] + static_cast<int>(phase);
            const QbdState& s = model.levels[level][phase];
            out << level << ',' << phase << ',' << s.group0_busy << ','
                << (s.group1_working ? 'W' : 'S') << ',' << s.group1_count << ','
                << format_real(pi(flat)) << ',' << format_real(f(flat)) << "\n";
        }
    }
    out << "\nquantity,value\n";
    out << "expected_power_rate," << format_real(expected_power_rate(pi, f)) << "\n";
    out << "loss_probability," << format_real(loss_probability(model, pi)) << "\n";
    for (double x : xs) {
        for (int r = 1; r <= max_moment; ++r) {
            const GammaMomentResult g = gamma_moment(model, f, pi, x, r, tolerance);
            out << "gamma_moment_x" << format_real(x) << "_r" << r << ','
                << format_real(g.value) << "\n";
        }
    }
    return out.str();
}

inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"group-server queue simulator and analytic toolkit"};
    app.require_subcommand(1);

    // simulate
    std::string sim_config_path, sim_output, sim_trace;
    double sim_horizon = 1e4, sim_warmup = 1e3;
    int sim_reps = 20;
    std::uint64_t sim_seed = 1;
    bool sim_text = false;
    auto* sim = app.add_subcommand("simulate", "run seeded replications and report metrics");
    sim->add_option("config", sim_config_path, "configuration file")->required();
    sim->add_option("--horizon", sim_horizon, "run length in time units");
    sim->add_option("--warmup", sim_warmup, "deleted initial segment");
    sim->add_option("--replications", sim_reps, "independent replications (>= 2)");
    sim->add_option("--seed", sim_seed, "base seed; replication i uses seed + i");
    sim->add_option("--output", sim_output, "report CSV path");
    sim->add_option("--trace", sim_trace, "trajectory CSV of replication 0");
    sim->add_flag("--text", sim_text, "print the pretty report instead of CSV");

    // analyze
    std::string ana_config_path, ana_output;
    std::vector<double> ana_xs;
    int ana_moments = 1;
    auto* ana = app.add_subcommand("analyze",
                                   "exact stationary analysis of the two-group loss model");
    ana->add_option("config", ana_config_path, "configuration file")->required();
    ana->add_option("--x", ana_xs, "power levels for first-passage moments");
    ana->add_option("--moments", ana_moments, "highest moment order r");
    ana->add_option("--output", ana_output, "analysis CSV path");

    // sweep
    std::string swp_config_path, swp_output;
    double swp_low = 16.0, swp_high = 44.0, swp_step = 4.0;
    double swp_horizon = 1e4, swp_warmup = 1e3;
    int swp_reps = 20;
    std::uint64_t swp_seed = 1;
    std::vector<std::string> swp_metrics;
    bool swp_no_svg = false;
    auto* swp = app.add_subcommand("sweep", "arrival-rate sweep with plot-ready output");
    swp->add_option("config", swp_config_path, "configuration file")->required();
    swp->add_option("--lambda-low", swp_low, "first grid rate");
    swp->add_option("--lambda-high", swp_high, "last grid rate");
    swp->add_option("--lambda-step", swp_step, "grid spacing");
    swp->add_option("--metrics", swp_metrics, "metric subset (default: all)");
    swp->add_option("--horizon", swp_horizon, "run length per grid point");
    swp->add_option("--warmup", swp_warmup, "deleted initial segment");
    swp->add_option("--replications", swp_reps, "replications per grid point");
    swp->add_option("--seed", swp_seed, "base seed shared across grid points");
    swp->add_option("--output", swp_output, "long-format CSV path");
    swp->add_flag("--no-svg", swp_no_svg, "skip the per-metric SVG charts");

    // validate
    std::string val_suite = "all";
    auto* val = app.add_subcommand("validate", "run oracle and cross-module checks");
    val->add_option("--suite", val_suite, "generator|oracle|crosscheck|all")
        ->check(CLI::IsMember({"generator", "oracle", "crosscheck", "all"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int cli_code = app.exit(e, std::cout, std::cerr);
        return cli_code == 0 ? kOk : kUsage;
    }

    try {
        if (sim->parsed()) {
            if (sim_reps < 2) return detail::fail_usage("--replications: need >= 2 for CIs");
            int code;
            const SystemConfig config = detail::load_validated(sim_config_path, code);
            if (code != kOk) return code;
            const SimReport report =
                run_replications(config, sim_horizon, sim_warmup, sim_seed, sim_reps);
            const std::string csv = report_csv(report);
            if (!sim_output.empty() && !detail::write_file(sim_output, csv)) return kUsage;
            std::cout << (sim_text ? report_text(report) : csv);
            if (!sim_trace.empty()) {
                SimOptions opt;
                opt.horizon = sim_horizon;
                opt.warmup = sim_warmup;
                opt.seed = sim_seed;
                opt.collect_trajectory = true;
                const RunStats run = simulate(config, opt);
                if (!detail::write_file(sim_trace, detail::trajectory_csv(run)))
                    return kUsage;
            }
            return kOk;
        }

        if (ana->parsed()) {
            for (double x : ana_xs)
                if (!(x > 0.0)) return detail::fail_usage("--x: power level must be > 0");
            if (ana_moments < 1) return detail::fail_usage("--moments: need r >= 1");
            int code;
            const SystemConfig config = detail::load_validated(ana_config_path, code);
            if (code != kOk) return code;
            const bool exponential =
                config.arrival.kind() == DistKind::Exponential &&
                config.groups.size() == 2 &&
                config.groups[0].service.kind() == DistKind::Exponential &&
                config.groups[1].service.kind() == DistKind::Exponential;
            if (!exponential || config.buffer.kind != BufferKind::Loss ||
                config.groups[1].thresholds.sleep_below != 0) {
                std::cerr << "error: analytic module supports only the two-group "
                             "exponential loss model with L = 0\n";
                return kFailure;
            }
            QbdParams p;
            p.group0_size = config.groups[0].size;
            p.group1_size = config.groups[1].size;
            p.wake_threshold = config.groups[1].thresholds.wake_at;
            p.arrival_rate = config.arrival_rate();
            p.service_rate0 = config.groups[0].service_rate();
            p.service_rate1 = config.groups[1].service_rate();
            const QbdModel model = build_generator(p);
            const Eigen::VectorXd pi = stationary_distribution(model);
            const Eigen::VectorXd f =
                reward_vector(model, config.groups[0].power_work,
                              config.groups[1].power_work, config.groups[1].power_sleep);
            const std::string csv = analyze_csv(model, pi, f, ana_xs, ana_moments);
            if (!ana_output.empty() && !detail::write_file(ana_output, csv)) return kUsage;
            std::cout << csv;
            return kOk;
        }

        if (swp->parsed()) {
            if (swp_reps < 2) return detail::fail_usage("--replications: need >= 2 for CIs");
            int code;
            const SystemConfig config = detail::load_validated(swp_config_path, code);
            if (code != kOk) return code;
            SweepSpec spec;
            spec.low = swp_low;
            spec.high = swp_high;
            spec.step = swp_step;
            spec.metrics = swp_metrics;
            if (!(spec.low < spec.high) || !(spec.step > 0.0))
                return detail::fail_usage("sweep requires lambda-low < lambda-high and step > 0");
            const SweepResult result =
                run_sweep(config, spec, swp_horizon, swp_warmup, swp_seed, swp_reps);
            const std::string csv = sweep_csv(result);
            if (!swp_output.empty()) {
                if (!detail::write_file(swp_output, csv)) return kUsage;
                if (!swp_no_svg) {
                    std::string prefix = swp_output;
                    const auto dot = prefix.rfind('.');
                    if (dot != std::string::npos) prefix = prefix.substr(0, dot);
                    write_sweep_charts(result, prefix);
                }
            }
            std::cout << csv;
            return kOk;
        }

        if (val->parsed()) {
            const std::vector<CheckResult> checks = run_suite(val_suite);
            bool all_pass = true;
            for (const auto& c : checks) {
                std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail
                          << "\n";
                all_pass = all_pass && c.pass;
            }
            std::cout << (all_pass ? "all checks passed" : "some checks FAILED") << "\n";
            return all_pass ? kOk : kFailure;
        }
    } catch (const SimulationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    } catch (const QbdError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}

}  // namespace gsq::cli
