#pragma once

#include "gsq/qbd.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

namespace gsq::oracles {

/// Reference CTMC assembled by breadth-first exploration. Deliberately shares
/// no transition code with build_generator: a transcription slip in either
/// construction shows up as a reachable-set or stationary-distribution
/// mismatch.
struct DenseCtmc {
    std::vector<QbdState> states;  // discovery order
    Eigen::MatrixXd rates;         // proper generator (diagonal filled)

    int index_of(const QbdState& s) const {
        for (std::size_t k = 0; k < states.size(); ++k)
            if (states[k] == s) return static_cast<int>(k);
        throw QbdError("state not reachable");
    }
};

namespace detail {

// Settles a raw post-event tuple by the prose rules of the two-group loss
// queue with L = 0: an empty working group sleeps; holders move one by one
// into idle group-0 servers; K holders wake the group.
inline QbdState settle(int n, int K, QbdState s) {
    if (s.group1_working && s.group1_count == 0) s.group1_working = false;
    while (!s.group1_working && s.group1_count > 0 && s.group0_busy < n) {
        s.group0_busy += 1;
        s.group1_count -= 1;
    }
    if (!s.group1_working && s.group1_count >= K) s.group1_working = true;
    return s;
}

}  // namespace detail

inline DenseCtmc brute_force_ctmc(const QbdParams& p, int state_cap = 100000) {
    const int n = p.group0_size;
    const int m = p.group1_size;
    const int K = p.wake_threshold;
    if (n < 1 || !(1 <= K && K <= m)) throw QbdError("invalid parameters");

    std::vector<QbdState> states;
    std::map<QbdState, int> seen;
    std::vector<std::map<int, double>> edges;

    auto visit = [&](const QbdState& s) {
        auto it = seen.find(s);
        if (it != seen.end()) return it->second;
        const int id = static_cast<int>(states.size());
        if (id >= state_cap) throw QbdError("state-space explosion guard tripped");
        seen.emplace(s, id);
        states.push_back(s);
        edges.emplace_back();
        return id;
    };

    visit(detail::settle(n, K, QbdState{0, false, 0}));
    for (std::size_t head = 0; head < states.size(); ++head) {
        const QbdState s = states[head];
        auto connect = [&](const QbdState& raw, double rate) {
            const QbdState t = detail::settle(n, K, raw);
            if (t == s) return;        // lost arrival or no-op
            const int id = visit(t);   // may grow the edge table
            edges[head][id] += rate;
        };
        // arrival: leftmost free server; a sleeping group parks a holder
        if (s.group0_busy < n) {
            connect(QbdState{s.group0_busy + 1, s.group1_working, s.group1_count},
                    p.arrival_rate);
        } else if (s.group1_count < m) {
            connect(QbdState{n, s.group1_working, s.group1_count + 1}, p.arrival_rate);
        }
        // group-0 completion
        if (s.group0_busy > 0)
            connect(QbdState{s.group0_busy - 1, s.group1_working, s.group1_count},
                    s.group0_busy * p.service_rate0);
        // group-1 completion (only while working)
        if (s.group1_working && s.group1_count > 0)
            connect(QbdState{s.group0_busy, true, s.group1_count - 1},
                    s.group1_count * p.service_rate1);
    }

    DenseCtmc out;
    out.states = states;
    const int total = static_cast<int>(states.size());
    out.rates = Eigen::MatrixXd::Zero(total, total);
    for (int from = 0; from < total; ++from) {
        double row = 0.0;
        for (const auto& [to, rate] : edges[from]) {
            out.rates(from, to) = rate;
            row += rate;
        }
        out.rates(from, from) = -row;
    }
    return out;
}

/// Stationary distribution by a full-pivot null-space extraction of Q^T;
/// an algebraic route independent of the replaced-column solve.
inline Eigen::VectorXd stationary_null_space(const Eigen::MatrixXd& Q) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Q.transpose());
    lu.setThreshold(1e-9);
    const Eigen::MatrixXd kernel = lu.kernel();
    if (kernel.cols() != 1) throw QbdError("generator kernel is not one-dimensional");
    Eigen::VectorXd pi = kernel.col(0);
    if (pi.sum() < 0.0) pi = -pi;
    for (int i = 0; i < pi.size(); ++i)
        if (pi(i) < 0.0 && pi(i) > -1e-12) pi(i) = 0.0;
    pi /= pi.sum();
    return pi;
}

/// Erlang-B blocking probability by the standard recursion
/// B(0) = 1, B(c) = a B(c-1) / (c + a B(c-1)).
inline double erlang_b_blocking(int servers, double offered_load) {
    if (servers < 1 || !(offered_load > 0.0))
        throw std::invalid_argument("need servers >= 1 and offered load > 0");
    double b = 1.0;
    for (int c = 1; c <= servers; ++c) b = offered_load * b / (c + offered_load * b);
    return b;
}

/// Erlang-B by the explicit summation a^c/c! / sum_k a^k/k!.
inline double erlang_b_blocking_by_sum(int servers, double offered_load) {
    double term = 1.0;
    double total = 1.0;
    for (int k = 1; k <= servers; ++k) {
        term *= offered_load / k;
        total += term;
    }
    return term / total;
}

struct ErlangAResult {
    double expected_count = 0.0;        // customers in system
    double expected_queue = 0.0;        // customers waiting
    double abandonment_fraction = 0.0;  // abandoned / offered
    int truncation = 0;
};

/// Birth-death solve of M/M/c + M on states 0..truncation.
inline ErlangAResult erlang_a_truncated(double lambda, int c, double mu, double theta,
                                        int truncation = 2000) {
    if (!(lambda > 0.0) || c < 1 || !(mu > 0.0) || !(theta >= 0.0))
        throw std::invalid_argument("bad Erlang-A parameters");
    if (theta == 0.0 && !(lambda < c * mu))
        throw std::invalid_argument("theta = 0 requires lambda < c mu");
    std::vector<double> weight(truncation + 1);
    weight[0] = 1.0;
    double total = 1.0;
    for (int k = 1; k <= truncation; ++k) {
        const double death = std::min(k, c) * mu + std::max(0, k - c) * theta;
        weight[k] = weight[k - 1] * lambda / death;
        total += weight[k];
    }
    // geometric bound on the truncated tail
    const double last_death = std::min(truncation + 1, c) * mu +
                              std::max(0, truncation + 1 - c) * theta;
    const double ratio = lambda / last_death;
    const double tail = ratio < 1.0 ? weight[truncation] * ratio / (1.0 - ratio)
                                    : std::numeric_limits<double>::infinity();
    if (!(tail / total < 1e-10))
        throw std::runtime_error("Erlang-A truncation level insufficient for tail mass 1e-10");
    ErlangAResult r;
    r.truncation = truncation;
    for (int k = 0; k <= truncation; ++k) {
        const double pk = weight[k] / total;
        r.expected_count += k * pk;
        if (k > c) r.expected_queue += (k - c) * pk;
        if (k > c) r.abandonment_fraction += (k - c) * theta * pk;
    }
    r.abandonment_fraction /= lambda;
    return r;
}

/// Expected customers in a stable M/M/c (Erlang-C waiting plus load).
inline double mmc_expected_count(double lambda, int c, double mu) {
    const double a = lambda / mu;
    const double rho = a / c;
    if (!(rho < 1.0)) throw std::invalid_argument("M/M/c requires lambda < c mu");
    // P(wait) from Erlang-B: C = B / (1 - rho (1 - B))
    const double b = erlang_b_blocking(c, a);
    const double pw = b / (1.0 - rho * (1.0 - b));
    return a + pw * rho / (1.0 - rho);
}

}  // namespace gsq::oracles
