#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsq {

/// Two-group loss queue with unilateral threshold control (L = 0): group 0
/// has `group0_size` always-on servers, group 1 has `group1_size` servers
/// that wake together once `wake_threshold` customers are parked at them.
struct QbdParams {
    int group0_size = 1;      // n
    int group1_size = 1;      // m
    int wake_threshold = 1;   // K
    double arrival_rate = 1.0;
    double service_rate0 = 1.0;
    double service_rate1 = 1.0;
};

/// One phase of the level process: i customers in service at group 0;
/// group 1 either sleeping with j holders or working with j in service.
struct QbdState {
    int group0_busy = 0;        // i
    bool group1_working = false;  // l1 == W
    int group1_count = 0;       // j

    friend bool operator==(const QbdState&, const QbdState&) = default;
    friend auto operator<=>(const QbdState&, const QbdState&) = default;
};

class QbdError : public std::runtime_error {
public:
    explicit QbdError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Levels indexed by the group-1 customer count j = 0..m. Level 0 lists the
/// sleeping states by ascending i; levels 1..K-1 start with the single
/// holder state (i = n) followed by the working states in descending i;
/// levels K..m hold only working states in descending i.
inline std::vector<std::vector<QbdState>> enumerate_states(int n, int m, int K) {
    if (n < 1) throw QbdError("group 0 must have at least one server");
    if (!(1 <= K && K <= m)) throw QbdError("require 1 <= K <= m");
    std::vector<std::vector<QbdState>> levels;
    levels.reserve(m + 1);
    std::vector<QbdState> level0;
    for (int i = 0; i <= n; ++i) level0.push_back(QbdState{i, false, 0});
    levels.push_back(std::move(level0));
    for (int j = 1; j <= m; ++j) {
        std::vector<QbdState> level;
        if (j <= K - 1) level.push_back(QbdState{n, false, j});
        for (int i = n; i >= 0; --i) level.push_back(QbdState{i, true, j});
        levels.push_back(std::move(level));
    }
    return levels;
}

struct QbdModel {
    QbdParams params;
    std::vector<std::vector<QbdState>> levels;
    std::vector<int> level_offset;  // start index of each level in flat order
    Eigen::MatrixXd generator;

    int num_states() const { return static_cast<int>(generator.rows()); }

    int index_of(const QbdState& s) const {
        const auto& level = levels[s.group1_count];
        for (std::size_t p = 0; p < level.size(); ++p)
            if (level[p] == s) return level_offset[s.group1_count] + static_cast<int>(p);
        throw QbdError("state not in the enumerated space");
    }

    QbdState state_at(int flat) const {
        for (std::size_t j = 0; j < levels.size(); ++j) {
            const int off = level_offset[j];
            if (flat < off + static_cast<int>(levels[j].size()))
                return levels[j][flat - off];
        }
        throw QbdError("flat index out of range");
    }

    int level_of(int flat) const {
        for (std::size_t j = levels.size(); j-- > 0;)
            if (flat >= level_offset[j]) return static_cast<int>(j);
        throw QbdError("flat index out of range");
    }
};

/// Assembles the block-tridiagonal generator over the enumerated levels.
/// Transitions per state:
///   - arrivals fill group-0 idle servers first; with group 0 full they
///     accumulate holders at the sleeping group 1, and the arrival seen at
///     K-1 holders wakes the whole group into level K;
///   - while group 1 works, arrivals overflow into it once group 0 is full,
///     and the state with everything busy loses arrivals (no transition);
///   - group-0 completions run at rate i*mu0; with holders present the freed
///     server is refilled instantly by the oldest holder (i stays n);
///   - group-1 completions run at rate j*mu1; the last one puts the whole
///     group back to sleep.
inline QbdModel build_generator(const QbdParams& p) {
    if (!(p.arrival_rate > 0.0) || !(p.service_rate0 > 0.0) || !(p.service_rate1 > 0.0))
        throw QbdError("rates must be strictly positive");
    QbdModel model;
    model.params = p;
    model.levels = enumerate_states(p.group0_size, p.group1_size, p.wake_threshold);
    int total = 0;
    for (const auto& level : model.levels) {
        model.level_offset.push_back(total);
        total += static_cast<int>(level.size());
    }
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(total, total);

    const int n = p.group0_size;
    const int m = p.group1_size;
    const int K = p.wake_threshold;
    const double lambda = p.arrival_rate;
    const double mu0 = p.service_rate0;
    const double mu1 = p.service_rate1;

    auto add = [&](int from, const QbdState& to, double rate) {
        Q(from, model.index_of(to)) += rate;
    };

    for (int flat = 0; flat < total; ++flat) {
        const QbdState s = model.state_at(flat);
        const int i = s.group0_busy;
        const int j = s.group1_count;
        if (!s.group1_working) {
            // arrivals
            if (i < n) {
                add(flat, QbdState{i + 1, false, 0}, lambda);
            } else if (j < K - 1) {
                add(flat, QbdState{n, false, j + 1}, lambda);
            } else {
                // the K-th waiting customer wakes the group
                add(flat, QbdState{n, true, K}, lambda);
            }
            // group-0 completions; a holder refills the freed server at once
            if (i > 0) {
                if (j >= 1) {
                    add(flat, QbdState{n, false, j - 1}, n * mu0);
                } else {
                    add(flat, QbdState{i - 1, false, 0}, i * mu0);
                }
            }
        } else {
            // arrivals: leftmost idle server
            if (i < n) {
                add(flat, QbdState{i + 1, true, j}, lambda);
            } else if (j < m) {
                add(flat, QbdState{n, true, j + 1}, lambda);
            }
            // else full system: arrival lost, no transition
            if (i > 0) add(flat, QbdState{i - 1, true, j}, i * mu0);
            if (j >= 2) {
                add(flat, QbdState{i, true, j - 1}, j * mu1);
            } else {
                // last group-1 completion: the group goes back to sleep
                add(flat, QbdState{i, false, 0}, mu1);
            }
        }
    }

    for (int r = 0; r < total; ++r) Q(r, r) = -Q.row(r).sum();
    model.generator = std::move(Q);
    return model;
}

/// pi Q = 0, pi e = 1 via replacing one balance column with the
/// normalization equation and a dense full-pivot LU solve. A rank-deficient
/// system means the generator is reducible (stationary vector not unique).
inline Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& Q,
                                               double residual_tol = 1e-10) {
    const int n = static_cast<int>(Q.rows());
    Eigen::MatrixXd A = Q;
    A.col(n - 1) = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A.transpose());
    if (!lu.isInvertible())
        throw QbdError("generator is reducible or singular; stationary vector not unique");
    Eigen::VectorXd pi = lu.solve(rhs);
    const double residual = (pi.transpose() * Q).cwiseAbs().maxCoeff();
    if (!(residual <= residual_tol))
        throw QbdError("stationary solve residual " + std::to_string(residual) +
                       " exceeds tolerance");
    for (int i = 0; i < n; ++i)
        if (pi(i) < 0.0 && pi(i) > -1e-13) pi(i) = 0.0;
    pi /= pi.sum();
    return pi;
}

inline Eigen::VectorXd stationary_distribution(const QbdModel& model,
                                               double residual_tol = 1e-10) {
    return stationary_distribution(model.generator, residual_tol);
}

/// Instantaneous power rate per state, in level order: all n base servers
/// draw work-on power; the m group-1 servers draw sleep or work-on power as
/// a block.
inline Eigen::VectorXd reward_vector(const QbdModel& model, double power_work0,
                                     double power_work1, double power_sleep1) {
    if (!(power_work0 >= 0.0))
        throw QbdError("power_work0 must be nonnegative");
    if (!(0.0 <= power_sleep1 && power_sleep1 <= power_work1))
        throw QbdError("power ordering violated: need 0 <= power_sleep1 <= power_work1");
    const int n = model.params.group0_size;
    const int m = model.params.group1_size;
    Eigen::VectorXd f(model.num_states());
    for (int flat = 0; flat < model.num_states(); ++flat) {
        const QbdState s = model.state_at(flat);
        f(flat) = n * power_work0 + m * (s.group1_working ? power_work1 : power_sleep1);
    }
    return f;
}

inline double expected_power_rate(const Eigen::VectorXd& pi, const Eigen::VectorXd& f) {
    if (pi.size() != f.size()) throw QbdError("dimension mismatch between pi and f");
    return pi.dot(f);
}

/// Stationary probability that an arrival is lost (PASTA): everything busy.
inline double loss_probability(const QbdModel& model, const Eigen::VectorXd& pi) {
    return pi(model.index_of(
        QbdState{model.params.group0_size, true, model.params.group1_size}));
}

struct GammaMomentResult {
    double value = 0.0;
    int terms_used = 0;  // largest series index reached within a segment
    int segments = 1;
};

class GammaMomentError : public std::runtime_error {
public:
    GammaMomentError(const std::string& msg, double partial, int terms)
        : std::runtime_error(msg), partial_value(partial), terms_used(terms) {}
    double partial_value;
    int terms_used;
};

/// E[Gamma(x)^r]: the r-th moment of the first time cumulative power reaches
/// x, for the Markov reward process (Q, f) started from pi0.
///
/// Evaluated through the moment-matrix recursion
///     M(r,k) = G M(r,k-1) - r D M(r-1,k-1),   M(0,0) = I, M(r,0) = 0,
/// with G the power-clock generator (rows of Q scaled by 1/f) and D =
/// diag(1/f); the series sum_k x^k/k! M(r,k) is accumulated until three
/// consecutive terms contribute below `tolerance` relative to the partial
/// sum, hard-capped at k_max. Large x is split into power segments short
/// enough for the series to stay well conditioned; segment moments combine
/// exactly through the Markov property, so the result does not degrade as x
/// grows.
inline GammaMomentResult gamma_moment(const Eigen::MatrixXd& Q, const Eigen::VectorXd& f,
                                      const Eigen::VectorXd& pi0, double x, int r,
                                      double tolerance = 1e-12, int k_max = 10000) {
    const int ns = static_cast<int>(Q.rows());
    if (f.size() != ns || pi0.size() != ns)
        throw QbdError("dimension mismatch between Q, f and pi0");
    for (int i = 0; i < ns; ++i)
        if (!(f(i) > 0.0)) throw QbdError("all power rates must be positive");
    if (!(x > 0.0)) throw QbdError("x must be > 0");
    if (r < 1) throw QbdError("moment order r must be >= 1");
    if (std::abs(pi0.sum() - 1.0) > 1e-9 || pi0.minCoeff() < -1e-12)
        throw QbdError("pi0 must be a probability vector");

    const Eigen::VectorXd inv_f = f.cwiseInverse();
    const Eigen::MatrixXd G = inv_f.asDiagonal() * Q;
    double qhat = 0.0;
    for (int i = 0; i < ns; ++i) qhat = std::max(qhat, std::abs(G(i, i)));

    // segment length chosen so the in-segment series needs only modest k
    const double target = 8.0;
    const int segments = std::max(1, static_cast<int>(std::ceil(x * qhat / target)));
    const double h = x / segments;

    // per-segment moment matrices U_b = E_s[tau(h)^b ; end state], b = 0..r
    std::vector<Eigen::MatrixXd> prev(r + 1), sum(r + 1);
    prev[0] = Eigen::MatrixXd::Identity(ns, ns);
    sum[0] = prev[0];
    for (int b = 1; b <= r; ++b) {
        prev[b] = Eigen::MatrixXd::Zero(ns, ns);
        sum[b] = prev[b];
    }
    double coeff = 1.0;
    int streak = 0;
    int terms = 0;
    for (int k = 1; k <= k_max; ++k) {
        coeff *= h / k;
        std::vector<Eigen::MatrixXd> cur(r + 1);
        double term_norm = 0.0;
        for (int b = 0; b <= r; ++b) {
            cur[b] = G * prev[b];
            if (b >= 1) cur[b].noalias() -= double(b) * inv_f.asDiagonal() * prev[b - 1];
            sum[b] += coeff * cur[b];
            term_norm = std::max(term_norm, coeff * cur[b].cwiseAbs().maxCoeff());
        }
        double sum_norm = 0.0;
        for (int b = 0; b <= r; ++b)
            sum_norm = std::max(sum_norm, sum[b].cwiseAbs().maxCoeff());
        prev = std::move(cur);
        terms = k;
        streak = term_norm <= tolerance * sum_norm ? streak + 1 : 0;
        if (streak >= 3) break;
        if (k == k_max) {
            Eigen::RowVectorXd w = pi0.transpose() * sum[r];
            throw GammaMomentError(
                "gamma moment series did not converge within k_max = " +
                    std::to_string(k_max),
                std::pow(-1.0, r) * w.sum(), k);
        }
    }
    std::vector<Eigen::MatrixXd> U(r + 1);
    for (int b = 0; b <= r; ++b) U[b] = (b % 2 == 0 ? 1.0 : -1.0) * sum[b];

    // propagate joint moments across segments: w_a = E[T^a ; state]
    std::vector<Eigen::RowVectorXd> w(r + 1, Eigen::RowVectorXd::Zero(ns));
    w[0] = pi0.transpose();
    std::vector<double> binom((r + 1) * (r + 1), 0.0);
    for (int a = 0; a <= r; ++a) {
        binom[a * (r + 1)] = 1.0;
        for (int b = 1; b <= a; ++b)
            binom[a * (r + 1) + b] =
                binom[(a - 1) * (r + 1) + b - 1] + (b <= a - 1 ? binom[(a - 1) * (r + 1) + b] : 0.0);
    }
    for (int seg = 0; seg < segments; ++seg) {
        std::vector<Eigen::RowVectorXd> next(r + 1, Eigen::RowVectorXd::Zero(ns));
        for (int a = r; a >= 0; --a) {
            for (int b = 0; b <= a; ++b)
                next[a].noalias() += binom[a * (r + 1) + b] * (w[a - b] * U[b]);
        }
        w = std::move(next);
    }
    return GammaMomentResult{w[r].sum(), terms, segments};
}

inline GammaMomentResult gamma_moment(const QbdModel& model, const Eigen::VectorXd& f,
                                      const Eigen::VectorXd& pi0, double x, int r,
                                      double tolerance = 1e-12, int k_max = 10000) {
    return gamma_moment(model.generator, f, pi0, x, r, tolerance, k_max);
}

/// Moment matrices of the series (exposed for tests of the base cases).
inline Eigen::MatrixXd moment_matrix(const Eigen::MatrixXd& Q, const Eigen::VectorXd& f,
                                     int r, int k) {
    const int ns = static_cast<int>(Q.rows());
    const Eigen::VectorXd inv_f = f.cwiseInverse();
    const Eigen::MatrixXd G = inv_f.asDiagonal() * Q;
    std::vector<Eigen::MatrixXd> prev(r + 1);
    prev[0] = Eigen::MatrixXd::Identity(ns, ns);
    for (int b = 1; b <= r; ++b) prev[b] = Eigen::MatrixXd::Zero(ns, ns);
    for (int step = 1; step <= k; ++step) {
        std::vector<Eigen::MatrixXd> cur(r + 1);
        for (int b = 0; b <= r; ++b) {
            cur[b] = G * prev[b];
            if (b >= 1) cur[b].noalias() -= double(b) * inv_f.asDiagonal() * prev[b - 1];
        }
        prev = std::move(cur);
    }
    return prev[r];
}

}  // namespace gsq
