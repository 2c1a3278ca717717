#include <catch2/catch_amalgamated.hpp>

#include "gsq/qbd.hpp"
#include "gsq/rng.hpp"

#include <cmath>
#include <vector>

using namespace gsq;

namespace {

/// Independent oracle: RK4 integration of the moment ODEs in the power
/// variable. With G the power-clock generator and c(s) = 1/f(s),
///   alpha' = alpha G            (state distribution at power level u)
///   w'     = w G + alpha C      (first-moment row vector, C = diag(c))
///   m2'    = 2 w c              (second moment)
/// so E[Gamma(x)] = integral of alpha c and E[Gamma(x)^2] = m2(x).
struct OdeMoments {
    double m1;
    double m2;
};

OdeMoments ode_oracle(const Eigen::MatrixXd& Q, const Eigen::VectorXd& f,
                      const Eigen::VectorXd& pi0, double x, int steps) {
    const Eigen::VectorXd c = f.cwiseInverse();
    const Eigen::MatrixXd G = c.asDiagonal() * Q;
    const int n = static_cast<int>(Q.rows());
    Eigen::RowVectorXd alpha = pi0.transpose();
    Eigen::RowVectorXd w = Eigen::RowVectorXd::Zero(n);
    double m1 = 0.0, m2 = 0.0;
    const double h = x / steps;
    auto deriv = [&](const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& wv) {
        struct D {
            Eigen::RowVectorXd da, dw;
            double dm1, dm2;
        } d;
        d.da = a * G;
        d.dw = wv * G + a.cwiseProduct(c.transpose());
        d.dm1 = a.dot(c.transpose());
        d.dm2 = 2.0 * wv.dot(c.transpose());
        return d;
    };
    for (int i = 0; i < steps; ++i) {
        const auto k1 = deriv(alpha, w);
        const auto k2 = deriv(alpha + 0.5 * h * k1.da, w + 0.5 * h * k1.dw);
        const auto k3 = deriv(alpha + 0.5 * h * k2.da, w + 0.5 * h * k2.dw);
        const auto k4 = deriv(alpha + h * k3.da, w + h * k3.dw);
        alpha += h / 6.0 * (k1.da + 2 * k2.da + 2 * k3.da + k4.da);
        w += h / 6.0 * (k1.dw + 2 * k2.dw + 2 * k3.dw + k4.dw);
        m1 += h / 6.0 * (k1.dm1 + 2 * k2.dm1 + 2 * k3.dm1 + k4.dm1);
        m2 += h / 6.0 * (k1.dm2 + 2 * k2.dm2 + 2 * k3.dm2 + k4.dm2);
    }
    return {m1, m2};
}

/// Direct Monte-Carlo first passage of the jump process.
double mc_first_passage_mean(const Eigen::MatrixXd& Q, const Eigen::VectorXd& f,
                             int start, double x, int reps, std::uint64_t seed) {
    RngStream rng(seed);
    const int n = static_cast<int>(Q.rows());
    double total = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        int s = start;
        double phi = 0.0, t = 0.0;
        while (true) {
            const double out_rate = -Q(s, s);
            double dwell;
            if (out_rate <= 0.0) {
                dwell = (x - phi) / f(s);
                t += dwell;
                break;
            }
            dwell = -std::log(rng.uniform01()) / out_rate;
            if (phi + f(s) * dwell >= x) {
                t += (x - phi) / f(s);
                break;
            }
            phi += f(s) * dwell;
            t += dwell;
            double u = rng.uniform01() * out_rate;
            int next = -1;
            for (int j = 0; j < n; ++j) {
                if (j == s) continue;
                u -= Q(s, j);
                if (u <= 0.0) {
                    next = j;
                    break;
                }
            }
            s = next >= 0 ? next : s;
        }
        total += t;
    }
    return total / reps;
}

}  // namespace

TEST_CASE("single-state chain reproduces (x/c)^r exactly") {
    Eigen::MatrixXd Q(1, 1);
    Q << 0.0;
    Eigen::VectorXd f(1), pi0(1);
    f << 3.7;
    pi0 << 1.0;
    const double x = 5.0;
    const auto r1 = gamma_moment(Q, f, pi0, x, 1);
    const auto r2 = gamma_moment(Q, f, pi0, x, 2);
    REQUIRE(r1.value == Catch::Approx(x / 3.7).epsilon(1e-15));
    REQUIRE(r2.value == Catch::Approx((x / 3.7) * (x / 3.7)).epsilon(1e-15));
    const auto r3 = gamma_moment(Q, f, pi0, x, 3);
    REQUIRE(r3.value == Catch::Approx(std::pow(x / 3.7, 3)).epsilon(1e-14));
}

TEST_CASE("moment-matrix base cases hold by construction") {
    const QbdModel model = build_generator(QbdParams{2, 2, 2, 2.0, 1.0, 1.0});
    const Eigen::VectorXd f = reward_vector(model, 2.0, 3.0, 1.0);
    const int n = model.num_states();
    REQUIRE(moment_matrix(model.generator, f, 0, 0).isApprox(
        Eigen::MatrixXd::Identity(n, n)));
    for (int r = 1; r <= 3; ++r)
        REQUIRE(moment_matrix(model.generator, f, r, 0).cwiseAbs().maxCoeff() == 0.0);
    // M(1,1) = -diag(1/f)
    const Eigen::MatrixXd m11 = moment_matrix(model.generator, f, 1, 1);
    const Eigen::MatrixXd expected = -Eigen::MatrixXd(f.cwiseInverse().asDiagonal());
    REQUIRE(m11.isApprox(expected));
}

TEST_CASE("two-state moments match the ODE oracle") {
    Eigen::MatrixXd Q(2, 2);
    Q << -1.0, 1.0, 1.0, -1.0;
    Eigen::VectorXd f(2);
    f << 1.0, 2.0;
    for (double x : {0.3, 1.0, 4.0, 20.0}) {
        for (int start : {0, 1}) {
            Eigen::VectorXd pi0 = Eigen::VectorXd::Zero(2);
            pi0(start) = 1.0;
            const auto oracle = ode_oracle(Q, f, pi0, x, 4000);
            const auto m1 = gamma_moment(Q, f, pi0, x, 1);
            const auto m2 = gamma_moment(Q, f, pi0, x, 2);
            INFO("x " << x << " start " << start);
            REQUIRE(m1.value == Catch::Approx(oracle.m1).epsilon(1e-8));
            REQUIRE(m2.value == Catch::Approx(oracle.m2).epsilon(1e-7));
        }
    }
}

TEST_CASE("paper-scale instance matches the ODE oracle and Monte Carlo") {
    const QbdModel model = build_generator(QbdParams{4, 4, 3, 30.0, 5.0, 4.0});
    const Eigen::VectorXd f = reward_vector(model, 2.0, 3.0, 1.0);
    const int empty = model.index_of(QbdState{0, false, 0});
    Eigen::VectorXd pi0 = Eigen::VectorXd::Zero(model.num_states());
    pi0(empty) = 1.0;
    for (double x : {30.0, 120.0}) {
        const auto oracle = ode_oracle(model.generator, f, pi0, x, 20000);
        const auto m1 = gamma_moment(model.generator, f, pi0, x, 1);
        const auto m2 = gamma_moment(model.generator, f, pi0, x, 2);
        INFO("x " << x);
        REQUIRE(m1.value == Catch::Approx(oracle.m1).epsilon(1e-7));
        REQUIRE(m2.value == Catch::Approx(oracle.m2).epsilon(1e-6));
        REQUIRE(m2.value >= m1.value * m1.value);
    }
    const double x = 60.0;
    const double mc = mc_first_passage_mean(model.generator, f, empty, x, 20000, 99);
    const auto m1 = gamma_moment(model.generator, f, pi0, x, 1);
    REQUIRE(std::abs(m1.value - mc) / m1.value < 0.03);
}

TEST_CASE("renewal-reward consistency at large x from the stationary start") {
    const QbdModel model = build_generator(QbdParams{4, 4, 3, 30.0, 5.0, 4.0});
    const Eigen::VectorXd f = reward_vector(model, 2.0, 3.0, 1.0);
    const Eigen::VectorXd pi = stationary_distribution(model);
    const double pif = expected_power_rate(pi, f);
    const double x = 100.0 * pif;  // about one hundred time units of power
    const auto m1 = gamma_moment(model.generator, f, pi, x, 1);
    const double ratio = m1.value * pif / x;
    REQUIRE(ratio > 0.99);
    REQUIRE(ratio < 1.01);
    REQUIRE(m1.segments > 1);  // large x exercises the segmented evaluation
}

TEST_CASE("second moment dominates the squared first moment across x") {
    const QbdModel model = build_generator(QbdParams{2, 2, 2, 2.0, 1.3, 0.8});
    const Eigen::VectorXd f = reward_vector(model, 1.0, 2.0, 0.5);
    const Eigen::VectorXd pi = stationary_distribution(model);
    for (double x : {0.5, 2.0, 8.0, 40.0, 200.0}) {
        const auto m1 = gamma_moment(model.generator, f, pi, x, 1);
        const auto m2 = gamma_moment(model.generator, f, pi, x, 2);
        INFO("x " << x);
        REQUIRE(m2.value >= m1.value * m1.value);
    }
}

TEST_CASE("series exhaustion carries the partial value out") {
    const QbdModel model = build_generator(QbdParams{4, 4, 3, 30.0, 5.0, 4.0});
    const Eigen::VectorXd f = reward_vector(model, 2.0, 3.0, 1.0);
    const Eigen::VectorXd pi = stationary_distribution(model);
    try {
        gamma_moment(model.generator, f, pi, 2.0, 1, 1e-12, /*k_max=*/3);
        FAIL("expected GammaMomentError");
    } catch (const GammaMomentError& e) {
        REQUIRE(e.terms_used == 3);
        REQUIRE(std::isfinite(e.partial_value));
    }
}

TEST_CASE("gamma moment rejects bad inputs") {
    const QbdModel model = build_generator(QbdParams{1, 1, 1, 1.0, 1.0, 1.0});
    const Eigen::VectorXd pi = stationary_distribution(model);
    Eigen::VectorXd f = reward_vector(model, 2.0, 3.0, 1.0);
    REQUIRE_THROWS_AS(gamma_moment(model.generator, f, pi, -1.0, 1), QbdError);
    REQUIRE_THROWS_AS(gamma_moment(model.generator, f, pi, 1.0, 0), QbdError);
    f(0) = 0.0;  // non-invertible power diagonal
    REQUIRE_THROWS_AS(gamma_moment(model.generator, f, pi, 1.0, 1), QbdError);
    Eigen::VectorXd not_prob = Eigen::VectorXd::Constant(model.num_states(), 0.4);
    f = reward_vector(model, 2.0, 3.0, 1.0);
    REQUIRE_THROWS_AS(gamma_moment(model.generator, f, not_prob, 1.0, 1), QbdError);
}
