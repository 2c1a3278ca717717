#include <catch2/catch_amalgamated.hpp>

#include "gsq/distributions.hpp"
#include "gsq/rng.hpp"

#include <cmath>

using namespace gsq;

namespace {

struct SampleMoments {
    double mean;
    double variance;
};

SampleMoments draw_moments(const ServiceDistribution& d, int n, std::uint64_t seed) {
    RngStream rng(seed);
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = d.sample(rng);
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n;
    return {mean, sum2 / n - mean * mean};
}

}  // namespace

TEST_CASE("deterministic distribution is a point mass") {
    const auto d = ServiceDistribution::deterministic(2.5);
    RngStream rng(7);
    for (int i = 0; i < 100; ++i) REQUIRE(d.sample(rng) == 2.5);
    REQUIRE(d.mean() == 2.5);
    REQUIRE(d.variance() == 0.0);
}

TEST_CASE("exponential sample mean converges to 1/rate") {
    const auto d = ServiceDistribution::exponential(5.0);
    const auto m = draw_moments(d, 1'000'000, 42);
    REQUIRE(std::abs(m.mean - 0.2) < 0.001);
}

TEST_CASE("erlang sample moments match the analytic values") {
    const auto d = ServiceDistribution::erlang(3, 6.0);
    REQUIRE(d.mean() == Catch::Approx(0.5));
    REQUIRE(d.variance() == Catch::Approx(3.0 / 36.0));
    const auto m = draw_moments(d, 1'000'000, 43);
    REQUIRE(std::abs(m.mean - 0.5) < 0.002);
    REQUIRE(std::abs(m.variance - 1.0 / 12.0) < 0.002);
}

TEST_CASE("closed-form means hold within five standard errors") {
    const int n = 1'000'000;
    const std::vector<ServiceDistribution> dists = {
        ServiceDistribution::exponential(3.0),
        ServiceDistribution::deterministic(0.7),
        ServiceDistribution::erlang(4, 2.0),
        ServiceDistribution::hyperexp2(1.0, 5.0, 0.3),
    };
    std::uint64_t seed = 1000;
    for (const auto& d : dists) {
        const auto m = draw_moments(d, n, seed++);
        const double se = std::sqrt(d.variance() / n);
        INFO("kind " << to_string(d.kind()));
        REQUIRE(std::abs(m.mean - d.mean()) <= 5.0 * se + 1e-9);
    }
}

TEST_CASE("hyperexponential moments") {
    const auto d = ServiceDistribution::hyperexp2(2.0, 8.0, 0.25);
    const double mean = 0.25 / 2.0 + 0.75 / 8.0;
    REQUIRE(d.mean() == Catch::Approx(mean));
    const double m2 = 2 * 0.25 / 4.0 + 2 * 0.75 / 64.0;
    REQUIRE(d.variance() == Catch::Approx(m2 - mean * mean));
}

TEST_CASE("rescaling preserves shape and hits the target rate") {
    const auto d = ServiceDistribution::erlang(3, 6.0).scaled_to_rate(4.0);
    REQUIRE(d.kind() == DistKind::Erlang);
    REQUIRE(d.shape() == 3);
    REQUIRE(d.rate() == Catch::Approx(4.0));
    const auto h = ServiceDistribution::hyperexp2(1.0, 5.0, 0.3).scaled_to_rate(2.0);
    REQUIRE(h.rate() == Catch::Approx(2.0));
    // squared coefficient of variation is scale-invariant
    const auto orig = ServiceDistribution::hyperexp2(1.0, 5.0, 0.3);
    REQUIRE(h.variance() / (h.mean() * h.mean()) ==
            Catch::Approx(orig.variance() / (orig.mean() * orig.mean())));
}

TEST_CASE("parameter violations are reported as data") {
    REQUIRE(ServiceDistribution::exponential(0.0).parameter_violations().size() == 1);
    REQUIRE(ServiceDistribution::erlang(0, 2.0).parameter_violations().size() == 1);
    REQUIRE(ServiceDistribution::hyperexp2(1.0, 1.0, 1.5).parameter_violations().size() == 1);
    REQUIRE(ServiceDistribution::exponential(2.0).parameter_violations().empty());
}

TEST_CASE("identical seeds give identical streams") {
    const auto d = ServiceDistribution::exponential(1.0);
    RngStream a(99), b(99);
    for (int i = 0; i < 1000; ++i) REQUIRE(d.sample(a) == d.sample(b));
}

TEST_CASE("substreams with different ids diverge") {
    auto a = make_substream(5, 0);
    auto b = make_substream(5, 1);
    bool differs = false;
    for (int i = 0; i < 8; ++i)
        if (a.next_u64() != b.next_u64()) differs = true;
    REQUIRE(differs);
}
