#pragma once

#include "gsq/distributions.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace gsq {

/// Bilateral threshold pair for a non-base group: the group wakes when its
/// relevant customer count reaches `wake_at` (config key K) and goes to sleep
/// when its in-service count drops below `sleep_below` (config key L).
struct ThresholdPair {
    int sleep_below = 0;  // L
    int wake_at = 1;      // K

    friend bool operator==(const ThresholdPair&, const ThresholdPair&) = default;
};

struct GroupSpec {
    int size = 0;  // number of servers m_j
    ServiceDistribution service;
    ThresholdPair thresholds;  // degenerate {0,1} for group 0
    double power_work = 0.0;   // per server, state work-on
    double power_sleep = 0.0;  // per server, state sleep (0 for group 0)

    double service_rate() const { return service.rate(); }

    friend bool operator==(const GroupSpec&, const GroupSpec&) = default;
};

enum class BufferKind { Loss, InfiniteWithImpatience };

struct BufferPolicy {
    BufferKind kind = BufferKind::Loss;
    double theta = 0.0;  // abandonment rate per waiting customer

    static BufferPolicy loss() { return {BufferKind::Loss, 0.0}; }
    static BufferPolicy impatient(double theta) {
        return {BufferKind::InfiniteWithImpatience, theta};
    }

    friend bool operator==(const BufferPolicy&, const BufferPolicy&) = default;
};

/// What happens to interrupted service when a customer is transferred:
/// Restart discards accrued service and resamples; Resume completes once the
/// accumulated in-service time reaches the originally sampled requirement.
enum class ResidualPolicy { Restart, Resume };

struct SystemConfig {
    std::vector<GroupSpec> groups;  // index 0 = base-line group, always work-on
    ServiceDistribution arrival;    // interarrival times; rate = 1/mean
    BufferPolicy buffer;
    ResidualPolicy residual = ResidualPolicy::Restart;

    double arrival_rate() const { return arrival.rate(); }
    int total_servers() const {
        int t = 0;
        for (const auto& g : groups) t += g.size;
        return t;
    }

    friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

struct ValidationResult {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

/// Total check of every structural invariant. Violations are data, not
/// failures: this never throws, whatever the input.
inline ValidationResult validate(const SystemConfig& config) {
    ValidationResult r;
    auto add = [&](std::string msg) { r.violations.push_back(std::move(msg)); };

    for (const auto& v : config.arrival.parameter_violations())
        add("arrival: " + v);

    if (config.groups.size() < 2)
        add("config must declare at least 2 groups (group 0 plus one threshold group)");

    for (std::size_t j = 0; j < config.groups.size(); ++j) {
        const auto& g = config.groups[j];
        const std::string tag = "group " + std::to_string(j);
        if (g.size < 1) add(tag + ": size m must be a positive integer");
        for (const auto& v : g.service.parameter_violations()) add(tag + ": service " + v);

        if (j == 0) {
            if (g.power_sleep != 0.0) add(tag + ": power_sleep must be 0 (no sleep state)");
            if (!(g.power_work >= 0.0) || !std::isfinite(g.power_work))
                add(tag + ": power_work must be a nonnegative real");
            continue;
        }

        if (g.thresholds.sleep_below < 0)
            add("L must be nonnegative in group " + std::to_string(j));
        if (g.thresholds.wake_at < 1)
            add("K must be positive in group " + std::to_string(j));
        if (g.thresholds.sleep_below > g.thresholds.wake_at)
            add("L exceeds K in group " + std::to_string(j));
        if (g.size >= 1 && g.thresholds.wake_at > g.size)
            add("K exceeds group size in group " + std::to_string(j));
        if (!std::isfinite(g.power_work) || !std::isfinite(g.power_sleep) ||
            !(g.power_sleep > 0.0) || !(g.power_work > 0.0)) {
            add("power rates must satisfy 0 < power_sleep < power_work in group " +
                std::to_string(j));
        } else if (!(g.power_sleep < g.power_work)) {
            add("power_sleep must be < power_work in group " + std::to_string(j));
        }
    }

    if (config.buffer.kind == BufferKind::InfiniteWithImpatience) {
        if (!(config.buffer.theta >= 0.0) || !std::isfinite(config.buffer.theta)) {
            add("theta must be a nonnegative real");
        } else if (config.buffer.theta == 0.0 && !config.groups.empty() &&
                   config.groups[0].size >= 1 &&
                   config.arrival.parameter_violations().empty() &&
                   config.groups[0].service.parameter_violations().empty()) {
            const double lambda = config.arrival_rate();
            const double mu0 = config.groups[0].service_rate();
            if (!(lambda < config.groups[0].size * mu0))
                add("theta = 0 requires arrival rate < m0 * mu0 (stability guard)");
        }
    } else if (config.buffer.theta != 0.0) {
        add("loss model must not carry a theta value");
    }

    return r;
}

}  // namespace gsq
