#include <catch2/catch_amalgamated.hpp>

#include "gsq/config.hpp"
#include "gsq/config_io.hpp"
#include "gsq/rng.hpp"

#include <algorithm>
#include <string>

using namespace gsq;

namespace {

SystemConfig paper_loss_config() {
    SystemConfig c;
    c.arrival = ServiceDistribution::exponential(30.0);
    GroupSpec g0;
    g0.size = 4;
    g0.service = ServiceDistribution::exponential(5.0);
    g0.power_work = 10.0;
    GroupSpec g1;
    g1.size = 4;
    g1.service = ServiceDistribution::exponential(4.0);
    g1.thresholds = ThresholdPair{2, 3};
    g1.power_work = 8.0;
    g1.power_sleep = 2.0;
    GroupSpec g2;
    g2.size = 3;
    g2.service = ServiceDistribution::exponential(3.0);
    g2.thresholds = ThresholdPair{2, 3};
    g2.power_work = 6.0;
    g2.power_sleep = 1.5;
    c.groups = {g0, g1, g2};
    c.buffer = BufferPolicy::loss();
    return c;
}

bool mentions(const ValidationResult& r, const std::string& needle) {
    return std::any_of(r.violations.begin(), r.violations.end(), [&](const std::string& v) {
        return v.find(needle) != std::string::npos;
    });
}

}  // namespace

TEST_CASE("three-group experiment configuration validates clean") {
    REQUIRE(validate(paper_loss_config()).ok());
}

TEST_CASE("L greater than K is a violation naming the group") {
    auto c = paper_loss_config();
    c.groups[1].thresholds = ThresholdPair{3, 2};
    const auto r = validate(c);
    REQUIRE_FALSE(r.ok());
    REQUIRE(mentions(r, "L exceeds K in group 1"));
}

TEST_CASE("equal sleep and work power is a violation") {
    auto c = paper_loss_config();
    c.groups[1].power_sleep = c.groups[1].power_work;
    const auto r = validate(c);
    REQUIRE_FALSE(r.ok());
    REQUIRE(mentions(r, "power_sleep must be < power_work in group 1"));
}

TEST_CASE("validate is total and idempotent") {
    SystemConfig garbage;  // no groups, default-constructed distribution
    garbage.groups = {};
    const auto r1 = validate(garbage);
    const auto r2 = validate(garbage);
    REQUIRE_FALSE(r1.ok());
    REQUIRE(r1.violations == r2.violations);

    auto c = paper_loss_config();
    c.groups[2].size = -1;
    c.groups[1].service = ServiceDistribution::exponential(-3.0);
    REQUIRE_FALSE(validate(c).ok());
}

TEST_CASE("stability guard fires only for theta = 0") {
    auto c = paper_loss_config();
    c.buffer = BufferPolicy::impatient(0.0);
    c.arrival = ServiceDistribution::exponential(25.0);  // m0 mu0 = 20
    REQUIRE(mentions(validate(c), "stability"));
    c.buffer = BufferPolicy::impatient(1.0);
    REQUIRE(validate(c).ok());
    c.buffer = BufferPolicy::impatient(0.0);
    c.arrival = ServiceDistribution::exponential(15.0);
    REQUIRE(validate(c).ok());
}

TEST_CASE("config text round-trips exactly") {
    auto c = paper_loss_config();
    REQUIRE(parse_config(render_config(c)) == c);

    c.buffer = BufferPolicy::impatient(1.25);
    c.residual = ResidualPolicy::Resume;
    REQUIRE(parse_config(render_config(c)) == c);
}

TEST_CASE("random valid configs round-trip through the grammar") {
    RngStream rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        SystemConfig c;
        auto random_dist = [&]() {
            switch (rng.next_u64() % 4) {
                case 0: return ServiceDistribution::exponential(0.1 + 9 * rng.uniform01());
                case 1: return ServiceDistribution::deterministic(0.1 + rng.uniform01());
                case 2:
                    return ServiceDistribution::erlang(1 + int(rng.next_u64() % 5),
                                                       0.1 + 9 * rng.uniform01());
                default:
                    return ServiceDistribution::hyperexp2(0.1 + 4 * rng.uniform01(),
                                                          0.1 + 9 * rng.uniform01(),
                                                          rng.uniform01());
            }
        };
        c.arrival = random_dist();
        const int n_groups = 2 + int(rng.next_u64() % 3);
        for (int j = 0; j < n_groups; ++j) {
            GroupSpec g;
            g.size = 1 + int(rng.next_u64() % 6);
            g.service = random_dist();
            if (j > 0) {
                g.thresholds.wake_at = 1 + int(rng.next_u64() % g.size);
                g.thresholds.sleep_below = int(rng.next_u64() % (g.thresholds.wake_at + 1));
                g.power_work = 1.0 + rng.uniform01();
                g.power_sleep = 0.5 * g.power_work * rng.uniform01() + 1e-3;
            } else {
                g.power_work = rng.uniform01();
            }
            c.groups.push_back(g);
        }
        if (rng.next_u64() % 2) c.buffer = BufferPolicy::impatient(0.1 + rng.uniform01());
        if (rng.next_u64() % 2) c.residual = ResidualPolicy::Resume;
        INFO(render_config(c));
        REQUIRE(parse_config(render_config(c)) == c);
    }
}

TEST_CASE("unknown keys and sections are parse errors") {
    const std::string base =
        "[arrival]\nkind = exponential\nrate = 2\n"
        "[group.0]\nm = 1\nkind = exponential\nrate = 3\np_work = 1\n"
        "[group.1]\nm = 2\nkind = exponential\nrate = 1\nL = 0\nK = 1\n"
        "p_work = 2\np_sleep = 1\n";
    REQUIRE_NOTHROW(parse_config(base));
    REQUIRE_THROWS_AS(parse_config(base + "bogus = 1\n"), ConfigParseError);
    REQUIRE_THROWS_AS(parse_config(base + "[nonsense]\n"), ConfigParseError);
    REQUIRE_THROWS_AS(parse_config("[arrival]\nkind = exponential\nrate = 2\nvalue = 3\n"),
                      ConfigParseError);
    REQUIRE_THROWS_WITH(parse_config(base + "[buffer]\nresidual = maybe\n"),
                        Catch::Matchers::ContainsSubstring("residual"));
}

TEST_CASE("group 0 must not carry thresholds or sleep power") {
    const std::string text =
        "[arrival]\nkind = exponential\nrate = 2\n"
        "[group.0]\nm = 1\nkind = exponential\nrate = 3\np_work = 1\nK = 1\n"
        "[group.1]\nm = 2\nkind = exponential\nrate = 1\nL = 0\nK = 1\n"
        "p_work = 2\np_sleep = 1\n";
    REQUIRE_THROWS_WITH(parse_config(text), Catch::Matchers::ContainsSubstring("'K'"));
}

TEST_CASE("missing sections are named") {
    REQUIRE_THROWS_WITH(parse_config("[group.0]\nm = 1\nkind = exponential\nrate = 1\np_work = 1\n"),
                        Catch::Matchers::ContainsSubstring("arrival"));
    REQUIRE_THROWS_WITH(parse_config("[arrival]\nkind = exponential\nrate = 1\n"),
                        Catch::Matchers::ContainsSubstring("group.0"));
}
