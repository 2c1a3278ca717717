#pragma once

#include "gsq/report.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsq {

/// Arrival-rate sweep: the config's interarrival distribution is rescaled to
/// each grid rate, everything else held fixed. Grid points share the base
/// seed, so common random numbers make the reported trends stable.
struct SweepSpec {
    double low = 0.0;
    double high = 0.0;
    double step = 0.0;
    std::vector<std::string> metrics;  // empty: all metrics

    std::vector<double> grid() const {
        if (!(low < high) || !(step > 0.0))
            throw std::invalid_argument("sweep requires low < high and step > 0");
        std::vector<double> g;
        for (double v = low; v <= high + 1e-9 * step; v += step) g.push_back(v);
        return g;
    }
};

struct SweepRow {
    double lambda = 0.0;
    std::string metric;
    MetricSummary summary;
};

struct SweepResult {
    std::vector<double> grid;
    std::vector<SweepRow> rows;  // grid-major, metric order within each point

    std::vector<double> means_of(const std::string& metric) const {
        std::vector<double> out;
        for (const auto& r : rows)
            if (r.metric == metric) out.push_back(r.summary.mean);
        return out;
    }
};

inline SweepResult run_sweep(const SystemConfig& config, const SweepSpec& spec,
                             double horizon, double warmup, std::uint64_t base_seed,
                             int replications, int max_workers = 0) {
    SweepResult result;
    result.grid = spec.grid();
    for (double lambda : result.grid) {
        SystemConfig point = config;
        point.arrival = config.arrival.scaled_to_rate(lambda);
        const SimReport report =
            run_replications(point, horizon, warmup, base_seed, replications, max_workers);
        for (const auto& [name, summary] : report.metrics) {
            if (!spec.metrics.empty() &&
                std::find(spec.metrics.begin(), spec.metrics.end(), name) ==
                    spec.metrics.end())
                continue;
            result.rows.push_back(SweepRow{lambda, name, summary});
        }
    }
    return result;
}

inline std::string sweep_csv(const SweepResult& result) {
    std::ostringstream out;
    out << "lambda,metric,mean,ci_low,ci_high\n";
    for (const auto& r : result.rows) {
        out << format_real(r.lambda) << ',' << r.metric << ',' << format_real(r.summary.mean)
            << ',' << format_real(r.summary.ci_low) << ',' << format_real(r.summary.ci_high)
            << "\n";
    }
    return out.str();
}

/// Minimal self-contained line chart: mean polyline plus CI whiskers.
inline std::string svg_line_chart(const std::string& title, const std::vector<double>& xs,
                                  const std::vector<MetricSummary>& ys) {
    const int w = 640, h = 420, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = xs.front(), xmax = xs.back();
    double ymin = ys.front().ci_low, ymax = ys.front().ci_high;
    for (const auto& y : ys) {
        ymin = std::min(ymin, y.ci_low);
        ymax = std::max(ymax, y.ci_high);
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) {
        ymax += 1.0;
        ymin -= 1.0;
    }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
    auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << title << "</text>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
        << h - mb << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << h - mb << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double yv = ymin + i * (ymax - ymin) / 4.0;
        out << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << format_real(yv) << "</text>\n";
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out << "<text x=\"" << px(xs[i]) << "\" y=\"" << h - mb + 16
            << "\" text-anchor=\"middle\" font-size=\"11\">" << format_real(xs[i])
            << "</text>\n";
    }
    out << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i)
        out << px(xs[i]) << ',' << py(ys[i].mean) << ' ';
    out << "\"/>\n";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out << "<line x1=\"" << px(xs[i]) << "\" y1=\"" << py(ys[i].ci_low) << "\" x2=\""
            << px(xs[i]) << "\" y2=\"" << py(ys[i].ci_high)
            << "\" stroke=\"#1f6fb2\" stroke-width=\"1\"/>\n";
        out << "<circle cx=\"" << px(xs[i]) << "\" cy=\"" << py(ys[i].mean)
            << "\" r=\"3\" fill=\"#1f6fb2\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

/// One SVG per metric next to the CSV: <prefix>_<metric>.svg.
inline std::vector<std::string> write_sweep_charts(const SweepResult& result,
                                                   const std::string& prefix) {
    std::vector<std::string> written;
    std::vector<std::string> metric_names;
    for (const auto& r : result.rows)
        if (std::find(metric_names.begin(), metric_names.end(), r.metric) ==
            metric_names.end())
            metric_names.push_back(r.metric);
    for (const auto& name : metric_names) {
        std::vector<MetricSummary> ys;
        for (const auto& r : result.rows)
            if (r.metric == name) ys.push_back(r.summary);
        if (ys.size() != result.grid.size()) continue;
        const std::string path = prefix + "_" + name + ".svg";
        std::ofstream out(path);
        out << svg_line_chart(name + " vs lambda", result.grid, ys);
        written.push_back(path);
    }
    return written;
}

}  // namespace gsq
