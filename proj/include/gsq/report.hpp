#pragma once

#include "gsq/simulation.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace gsq {

struct MetricSummary {
    double mean = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double half_width() const { return (ci_high - ci_low) / 2.0; }
};

/// Point estimates with Student-t 95% confidence intervals across
/// independent replications. Metric order is fixed so CSV output is
/// byte-stable.
struct SimReport {
    std::vector<std::pair<std::string, MetricSummary>> metrics;
    int replications = 0;
    std::uint64_t base_seed = 0;

    const MetricSummary& at(const std::string& name) const {
        for (const auto& [n, m] : metrics)
            if (n == name) return m;
        throw std::out_of_range("no such metric: " + name);
    }
    bool has(const std::string& name) const {
        for (const auto& [n, m] : metrics)
            if (n == name) return true;
        return false;
    }
};

inline double student_t_975(int df) {
    boost::math::students_t dist(static_cast<double>(df));
    return boost::math::quantile(dist, 0.975);
}

namespace detail {

inline MetricSummary summarize(const std::vector<double>& xs) {
    const int n = static_cast<int>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    const double hw = n > 1 ? student_t_975(n - 1) * sd / std::sqrt(double(n)) : 0.0;
    return MetricSummary{mean, mean - hw, mean + hw};
}

inline int worker_count(int requested, int jobs) {
    int w = requested;
    if (const char* env = std::getenv("GSQ_MAX_WORKERS")) {
        const int cap = std::atoi(env);
        if (cap >= 1 && (w <= 0 || cap < w)) w = cap;
    }
    if (w <= 0) w = static_cast<int>(std::thread::hardware_concurrency());
    if (w <= 0) w = 1;
    return std::min(w, jobs);
}

}  // namespace detail

inline SimReport aggregate_runs(const std::vector<RunStats>& runs,
                                std::uint64_t base_seed) {
    if (runs.size() < 2)
        throw SimulationError("need >= 2 replications for confidence intervals");
    const std::size_t n_groups = runs.front().group_count_avg.size();
    SimReport report;
    report.replications = static_cast<int>(runs.size());
    report.base_seed = base_seed;

    auto add = [&](const std::string& name, auto getter) {
        std::vector<double> xs;
        xs.reserve(runs.size());
        for (const auto& r : runs) xs.push_back(getter(r));
        report.metrics.emplace_back(name, detail::summarize(xs));
    };

    for (std::size_t j = 0; j < n_groups; ++j)
        add("group" + std::to_string(j) + "_count",
            [j](const RunStats& r) { return r.group_count_avg[j]; });
    add("system_count", [](const RunStats& r) { return r.system_count_avg; });
    add("buffer_count", [](const RunStats& r) { return r.buffer_count_avg; });
    add("sojourn_time", [](const RunStats& r) { return r.mean_sojourn(); });
    add("virtual_service_time", [](const RunStats& r) { return r.mean_virtual_service(); });
    add("loss_probability", [](const RunStats& r) { return r.loss_probability(); });
    add("abandonment_fraction", [](const RunStats& r) { return r.abandonment_fraction(); });
    add("power_rate", [](const RunStats& r) { return r.power_rate_avg; });
    return report;
}

/// R independent seeded runs (base_seed + index). Replications may execute
/// concurrently; results are aggregated in index order, so the report is
/// identical to a sequential execution.
inline SimReport run_replications(const SystemConfig& config, double horizon,
                                  double warmup, std::uint64_t base_seed, int R,
                                  int max_workers = 0) {
    if (R < 2) throw SimulationError("need >= 2 replications for confidence intervals");
    std::vector<RunStats> runs(R);
    const int workers = detail::worker_count(max_workers, R);
    if (workers <= 1) {
        for (int i = 0; i < R; ++i) {
            SimOptions opt;
            opt.horizon = horizon;
            opt.warmup = warmup;
            opt.seed = base_seed + static_cast<std::uint64_t>(i);
            runs[i] = simulate(config, opt);
        }
    } else {
        // waves of at most `workers` concurrent runs; index-ordered collection
        for (int base = 0; base < R; base += workers) {
            const int count = std::min(workers, R - base);
            std::vector<std::future<RunStats>> futures(count);
            for (int k = 0; k < count; ++k) {
                const int i = base + k;
                futures[k] = std::async(std::launch::async,
                                        [&config, horizon, warmup, base_seed, i]() {
                                            SimOptions opt;
                                            opt.horizon = horizon;
                                            opt.warmup = warmup;
                                            opt.seed =
                                                base_seed + static_cast<std::uint64_t>(i);
                                            return simulate(config, opt);
                                        });
            }
            for (int k = 0; k < count; ++k) runs[base + k] = futures[k].get();
        }
    }
    return aggregate_runs(runs, base_seed);
}

inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string report_csv(const SimReport& report) {
    std::ostringstream out;
    out << "# replications = " << report.replications << "\n";
    out << "# seed = " << report.base_seed << "\n";
    out << "metric,mean,ci_low,ci_high\n";
    for (const auto& [name, m] : report.metrics) {
        out << name << ',' << format_real(m.mean) << ',' << format_real(m.ci_low) << ','
            << format_real(m.ci_high) << "\n";
    }
    return out.str();
}

inline std::string report_text(const SimReport& report) {
    std::ostringstream out;
    out << "replications: " << report.replications << "  seed: " << report.base_seed
        << "\n";
    std::size_t width = 0;
    for (const auto& [name, m] : report.metrics) width = std::max(width, name.size());
    for (const auto& [name, m] : report.metrics) {
        out << "  " << name << std::string(width - name.size() + 2, ' ')
            << format_real(m.mean) << "  [" << format_real(m.ci_low) << ", "
            << format_real(m.ci_high) << "]\n";
    }
    return out.str();
}

}  // namespace gsq
