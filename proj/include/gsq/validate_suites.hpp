#pragma once

#include "gsq/oracles.hpp"
#include "gsq/qbd.hpp"
#include "gsq/report.hpp"
#include "gsq/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace gsq {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace detail {

inline void check(std::vector<CheckResult>& out, const std::string& name, bool pass,
                  const std::string& detail) {
    out.push_back(CheckResult{name, pass, detail});
}

inline std::string fmt(double v) { return format_real(v); }

}  // namespace detail

/// Structural checks of the QBD generator across parameter instances.
inline std::vector<CheckResult> run_generator_suite() {
    using detail::check;
    std::vector<CheckResult> out;
    const std::vector<std::array<int, 3>> instances = {
        {1, 1, 1}, {2, 2, 2}, {4, 4, 3}, {3, 5, 4}};
    for (const auto& [n, m, K] : instances) {
        const std::string tag =
            "(" + std::to_string(n) + "," + std::to_string(m) + "," + std::to_string(K) + ")";
        QbdParams p{n, m, K, 3.0, 1.7, 1.3};
        const QbdModel model = build_generator(p);

        const int expected = (n + 1) + (K - 1) * (n + 2) + (m - K + 1) * (n + 1);
        check(out, "level sizes " + tag, model.num_states() == expected,
              std::to_string(model.num_states()) + " states, expected " +
                  std::to_string(expected));

        const double row_residual = model.generator.rowwise().sum().cwiseAbs().maxCoeff();
        check(out, "rows sum to zero " + tag, row_residual <= 1e-12,
              "max |row sum| = " + detail::fmt(row_residual));

        double min_off = 0.0;
        bool tridiagonal = true;
        for (int a = 0; a < model.num_states(); ++a) {
            for (int b = 0; b < model.num_states(); ++b) {
                if (a != b) min_off = std::min(min_off, model.generator(a, b));
                if (std::abs(model.level_of(a) - model.level_of(b)) >= 2 &&
                    model.generator(a, b) != 0.0)
                    tridiagonal = false;
            }
        }
        check(out, "off-diagonals nonnegative " + tag, min_off >= 0.0,
              "min off-diagonal = " + detail::fmt(min_off));
        check(out, "block-tridiagonal " + tag, tridiagonal,
              tridiagonal ? "no entries beyond adjacent levels" : "entry beyond adjacent level");
    }
    return out;
}

/// Closed-form and dual-construction oracle checks.
inline std::vector<CheckResult> run_oracle_suite() {
    using detail::check;
    std::vector<CheckResult> out;

    check(out, "Erlang-B c=1 a=1", std::abs(oracles::erlang_b_blocking(1, 1.0) - 0.5) < 1e-15,
          "B = " + detail::fmt(oracles::erlang_b_blocking(1, 1.0)));
    check(out, "Erlang-B c=2 a=1", std::abs(oracles::erlang_b_blocking(2, 1.0) - 0.2) < 1e-15,
          "B = " + detail::fmt(oracles::erlang_b_blocking(2, 1.0)));
    check(out, "Erlang-B c=4 a=4",
          std::abs(oracles::erlang_b_blocking(4, 4.0) - 32.0 / 103.0) < 1e-12,
          "B = " + detail::fmt(oracles::erlang_b_blocking(4, 4.0)));
    double max_gap = 0.0;
    for (int c = 1; c <= 20; ++c) {
        const double a = 0.7 * c + 0.3;
        max_gap = std::max(max_gap, std::abs(oracles::erlang_b_blocking(c, a) -
                                             oracles::erlang_b_blocking_by_sum(c, a)));
    }
    check(out, "Erlang-B recursion vs summation, c <= 20", max_gap < 1e-12,
          "max gap = " + detail::fmt(max_gap));

    const std::vector<std::array<int, 3>> instances = {{2, 2, 2}, {4, 4, 3}, {3, 5, 4}};
    for (const auto& [n, m, K] : instances) {
        const std::string tag =
            "(" + std::to_string(n) + "," + std::to_string(m) + "," + std::to_string(K) + ")";
        QbdParams p{n, m, K, 2.4, 1.1, 0.9};
        const QbdModel model = build_generator(p);
        const oracles::DenseCtmc ctmc = oracles::brute_force_ctmc(p);

        std::set<QbdState> enumerated;
        for (const auto& level : model.levels)
            for (const auto& s : level) enumerated.insert(s);
        const std::set<QbdState> reached(ctmc.states.begin(), ctmc.states.end());
        check(out, "reachable set equals enumeration " + tag, enumerated == reached,
              std::to_string(reached.size()) + " reachable vs " +
                  std::to_string(enumerated.size()) + " enumerated");

        const Eigen::VectorXd pi = stationary_distribution(model);
        const Eigen::VectorXd pi_oracle = oracles::stationary_null_space(ctmc.rates);
        double gap = 0.0;
        for (int flat = 0; flat < model.num_states(); ++flat) {
            const int k = ctmc.index_of(model.state_at(flat));
            gap = std::max(gap, std::abs(pi(flat) - pi_oracle(k)));
        }
        check(out, "stationary distributions agree " + tag, gap <= 1e-10,
              "max |pi - pi_oracle| = " + detail::fmt(gap));
    }

    {
        const auto r = oracles::erlang_a_truncated(3.0, 2, 2.0, 1e6, 400);
        check(out, "Erlang-A theta->inf empties the queue", r.expected_queue < 1e-4,
              "E[queue] = " + detail::fmt(r.expected_queue));
        const auto r0 = oracles::erlang_a_truncated(3.0, 2, 2.0, 1e-12, 4000);
        const double mmc = oracles::mmc_expected_count(3.0, 2, 2.0);
        check(out, "Erlang-A theta->0 matches M/M/c", std::abs(r0.expected_count - mmc) < 1e-6,
              detail::fmt(r0.expected_count) + " vs " + detail::fmt(mmc));
    }
    return out;
}

inline SystemConfig crosscheck_config(double lambda) {
    SystemConfig config;
    config.arrival = ServiceDistribution::exponential(lambda);
    GroupSpec g0;
    g0.size = 4;
    g0.service = ServiceDistribution::exponential(5.0);
    g0.power_work = 2.0;
    GroupSpec g1;
    g1.size = 4;
    g1.service = ServiceDistribution::exponential(4.0);
    g1.thresholds = ThresholdPair{0, 3};
    g1.power_work = 3.0;
    g1.power_sleep = 1.0;
    config.groups = {g0, g1};
    config.buffer = BufferPolicy::loss();
    return config;
}

/// Simulation vs analytics on a matched two-group instance.
inline std::vector<CheckResult> run_crosscheck_suite() {
    using detail::check;
    std::vector<CheckResult> out;
    const double lambda = 30.0;
    const SystemConfig config = crosscheck_config(lambda);
    QbdParams p{4, 4, 3, lambda, 5.0, 4.0};
    const QbdModel model = build_generator(p);
    const Eigen::VectorXd pi = stationary_distribution(model);
    const Eigen::VectorXd f = reward_vector(model, 2.0, 3.0, 1.0);
    const double pif = expected_power_rate(pi, f);

    SimOptions opt;
    opt.horizon = 1e5;
    opt.warmup = 1e3;
    opt.seed = 20240601;
    const RunStats run = simulate_loss(config, opt);
    const double sim_power = run.power_rate_avg;
    const double rel = std::abs(sim_power - pif) / pif;
    check(out, "long-run power rate sim vs pi*f", rel <= 0.02,
          "sim " + detail::fmt(sim_power) + " vs analytic " + detail::fmt(pif) +
              " (rel gap " + detail::fmt(rel) + ")");

    const double loss_analytic = loss_probability(model, pi);
    const double loss_sim = run.loss_probability();
    const double loss_gap = std::abs(loss_sim - loss_analytic);
    check(out, "loss probability sim vs analytic", loss_gap <= 0.01,
          "sim " + detail::fmt(loss_sim) + " vs analytic " + detail::fmt(loss_analytic));
    return out;
}

inline std::vector<CheckResult> run_suite(const std::string& which) {
    std::vector<CheckResult> out;
    if (which == "generator" || which == "all") {
        auto g = run_generator_suite();
        out.insert(out.end(), g.begin(), g.end());
    }
    if (which == "oracle" || which == "all") {
        auto o = run_oracle_suite();
        out.insert(out.end(), o.begin(), o.end());
    }
    if (which == "crosscheck" || which == "all") {
        auto c = run_crosscheck_suite();
        out.insert(out.end(), c.begin(), c.end());
    }
    return out;
}

}  // namespace gsq
