#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "clmm/core.hpp"
#include "doctest.h"

using namespace clmm;

namespace {

PoolState<double> pool(double z, double k, double tau) { return {z, k, tau, {}}; }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("level function") {
    CHECK(level_function(2.0, 2.0) == doctest::Approx(2.0));
    CHECK(level_function(1.0, 10.0) == doctest::Approx(100.0));
    CHECK(level_function(4.0, 6.0) == doctest::Approx(9.0));
    CHECK_THROWS_AS(level_function(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(level_function(1.0, -1.0), DomainError);
}

TEST_CASE("execution rate") {
    SUBCASE("infinitesimal limits") {
        CHECK(execution_rate(pool(100, 1000, 0), Side::Buy, 0.0) == doctest::Approx(100.0));
        CHECK(execution_rate(pool(100, 1000, 0.0005), Side::Sell, 0.0) == doctest::Approx(99.95));
        CHECK(execution_rate(pool(100, 1000, 0.0005), Side::Buy, 0.0) == doctest::Approx(100 / 0.9995));
        // small trades converge to the limits
        CHECK(execution_rate(pool(100, 1000, 0.0005), Side::Sell, 1e-9) == doctest::Approx(99.95).epsilon(1e-9));
        CHECK(execution_rate(pool(100, 1000, 0), Side::Buy, 1e-9) == doctest::Approx(100.0).epsilon(1e-9));
    }
    SUBCASE("finite buy") {
        CHECK(execution_rate(pool(100, 1000, 0), Side::Buy, 10.0) == doctest::Approx(1000.0 / 9.0));
    }
    SUBCASE("exhaustion") {
        CHECK_THROWS_AS(execution_rate(pool(100, 1000, 0), Side::Buy, 100.0), LiquidityExhausted);
        CHECK_THROWS_AS(execution_rate(pool(100, 1000, 0), Side::Buy, -1.0), DomainError);
    }
    SUBCASE("price impact sign") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(0, 1);
        for (int i = 0; i < 2000; ++i) {
            const auto p = pool(1 + 1000 * u(rng), 1 + 1e4 * u(rng), 0.01 * u(rng));
            const double y = p.reserve_y() * 0.99 * u(rng) + 1e-12;
            CHECK(execution_rate(p, Side::Buy, y) >= p.rate);
            CHECK(execution_rate(p, Side::Sell, y) <= p.rate);
        }
    }
}

TEST_CASE("range from spread") {
    const auto r = range_from_spread(100.0, 0.01, 0.01);
    CHECK(r.lower == doctest::Approx(99.0025).epsilon(1e-12));
    CHECK(r.upper == doctest::Approx(100.0 / (0.995 * 0.995)).epsilon(1e-12));
    CHECK(r.upper == doctest::Approx(101.00755).epsilon(1e-7));

    const auto tiny = range_from_spread(100.0, 1e-12, 0.0);
    CHECK(tiny.lower == doctest::Approx(100.0));
    CHECK(tiny.upper == doctest::Approx(100.0));

    const auto wide = range_from_spread(100.0, 2.0, std::nextafter(2.0, 0.0));
    CHECK(wide.lower == 0.0);
    CHECK(wide.upper > 1e30);

    CHECK_THROWS_AS(range_from_spread(100.0, 0.0, 0.1), DomainError);
    CHECK_THROWS_AS(range_from_spread(100.0, 0.1, 2.0), DomainError);
    CHECK_THROWS_AS(range_from_spread(100.0, 2.1, 0.1), DomainError);
    CHECK_THROWS_AS(range_from_spread(-1.0, 0.1, 0.1), DomainError);

    // relative width approximates the spread to first order
    const auto n = range_from_spread(2000.0, 0.0005, 0.0005);
    CHECK((n.upper - n.lower) / 2000.0 == doctest::Approx(0.001).epsilon(1e-3));
}

TEST_CASE("spread round trip") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 5000; ++i) {
        const double z = std::exp(10 * u(rng) - 5);
        const double dl = 1e-6 + 1.9 * u(rng), du = 1.9 * u(rng);
        const auto legs = spread_from_range(z, range_from_spread(z, dl, du));
        CHECK(std::abs(legs.lower - dl) < 1e-12);
        CHECK(std::abs(legs.upper - du) < 1e-12);
    }
    const auto full = spread_from_range(4.0, RateRange<double>{0.0, std::numeric_limits<double>::infinity()});
    CHECK(full.lower == 2.0);
    CHECK(full.upper == 2.0);
}

TEST_CASE("round to ticks") {
    std::vector<double> grid;
    for (int i = 90; i <= 110; ++i) grid.push_back(i);
    auto r = round_to_ticks(RateRange<double>{99.0, 101.0}, grid);
    CHECK(r.lower == 99.0);
    CHECK(r.upper == 101.0);
    r = round_to_ticks(RateRange<double>{99.4, 100.6}, grid);
    CHECK(r.lower == 99.0);
    CHECK(r.upper == 101.0);
    r = round_to_ticks(RateRange<double>{99.9, 100.2}, grid);
    CHECK(r.lower == 100.0);
    CHECK(r.upper == 101.0);
    r = round_to_ticks(RateRange<double>{99.6, 99.95}, grid);
    CHECK(r.lower == 99.0);
    CHECK(r.upper == 100.0);
    // ties widen outward
    r = round_to_ticks(RateRange<double>{99.5, 100.5}, grid);
    CHECK(r.lower == 99.0);
    CHECK(r.upper == 101.0);
    // clamped to the grid ends
    r = round_to_ticks(RateRange<double>{10.0, 1000.0}, grid);
    CHECK(r.lower == 90.0);
    CHECK(r.upper == 110.0);
    r = round_to_ticks(RateRange<double>{1.0, 2.0}, grid);
    CHECK(r.lower == 90.0);
    CHECK(r.upper == 91.0);
    CHECK_THROWS_AS(round_to_ticks(RateRange<double>{1.0, 2.0}, std::vector<double>{}), DomainError);
    CHECK_THROWS_AS(round_to_ticks(RateRange<double>{2.0, 1.0}, grid), DomainError);
}

TEST_CASE("holdings") {
    const RateRange<double> range{99.0025, 100.0 / (0.995 * 0.995)};
    auto h = holdings_for_position(100.0, range, 0.0);
    CHECK(h.x == 0.0);
    CHECK(h.y == 0.0);
    h = holdings_for_position(100.0, range, 1.0);
    CHECK(h.x == doctest::Approx(10.0 - std::sqrt(99.0025)).epsilon(1e-12));
    CHECK(h.x == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(h.y == doctest::Approx(0.1 - 0.995 / 10.0).epsilon(1e-12));
    CHECK(h.y == doctest::Approx(5e-4).epsilon(1e-9));

    SUBCASE("continuity at the boundaries") {
        for (double z : {range.lower, range.upper}) {
            const auto at = holdings_for_position(z, range, 3.0);
            const auto below = holdings_for_position(std::nextafter(z, 0.0), range, 3.0);
            const auto above = holdings_for_position(std::nextafter(z, 1e9), range, 3.0);
            CHECK(std::abs(at.x - below.x) < 1e-12);
            CHECK(std::abs(at.y - below.y) < 1e-12);
            CHECK(std::abs(at.x - above.x) < 1e-12);
            CHECK(std::abs(at.y - above.y) < 1e-12);
        }
    }
    SUBCASE("out of range") {
        const auto lo = holdings_for_position(50.0, range, 1.0);
        CHECK(lo.x == 0.0);
        CHECK(lo.y > 0.0);
        const auto hi = holdings_for_position(150.0, range, 1.0);
        CHECK(hi.y == 0.0);
        CHECK(hi.x > 0.0);
    }
    CHECK_THROWS_AS(holdings_for_position(100.0, RateRange<double>{2.0, 1.0}, 1.0), DomainError);
}

TEST_CASE("depth from wealth") {
    CHECK(depth_from_wealth(1.0, 1.0, 1.0, 1.0) == doctest::Approx(1.0));
    CHECK(depth_from_wealth(100.0, 100.0, 0.01, 0.01) == doctest::Approx(1000.0));
    CHECK_THROWS_AS(depth_from_wealth(1.0, 1.0, 0.0, 0.0), DomainError);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 5000; ++i) {
        const double w = std::exp(20 * u(rng) - 10), z = std::exp(10 * u(rng) - 5);
        const double dl = 1e-6 + 1.9 * u(rng), du = 1.9 * u(rng);
        const auto p = open_position(w, z, dl, du);
        CHECK(rel(position_value(p.holdings, z), w) < 1e-12);
        CHECK(rel(depth_for_range(w, z, p.range), p.depth) < 1e-12);
        if (du > 1e-3) CHECK(rel(p.holdings.x / w, dl / (dl + du)) < 1e-10);
    }
}

TEST_CASE("fee share") {
    const RateRange<double> r{99.0, 101.0};
    CHECK(fee_share(5.0, 5.0, 2.0, 100.0, r) == doctest::Approx(2.0));
    CHECK(fee_share(5.0, 5.0, 2.0, 102.0, r) == 0.0);
    CHECK(fee_share(5.0, 5.0, 2.0, 99.0, r) == 0.0);   // open at the lower end
    CHECK(fee_share(5.0, 5.0, 2.0, 101.0, r) == 2.0);  // closed at the upper end
    CHECK(fee_share(1.0, 4.0, 1.0, 100.0, r) == doctest::Approx(0.25));
    CHECK(fee_share(2.0, 4.0, 3.0, 100.0, r) == doctest::Approx(2 * fee_share(1.0, 4.0, 3.0, 100.0, r)));
    CHECK_THROWS_AS(fee_share(1.0, 0.0, 1.0, 100.0, r), DomainError);
}

TEST_CASE("position value") {
    CHECK(position_value(0.0, 0.0, 5.0) == 0.0);
    CHECK(position_value(1.0, 1.0, 100.0) == 101.0);
    const auto p = open_position(10.0, 100.0, 0.02, 0.02);
    CHECK(p.holdings.x == doctest::Approx(p.holdings.y * 100.0).epsilon(1e-12));
}

TEST_CASE("ticked pool swaps") {
    const std::vector<double> ticks{90, 95, 100, 105, 110};
    const std::vector<double> depths{1000, 2000, 3000, 4000};
    SUBCASE("within one range matches the single-range execution rate") {
        TickedPool<double> p(ticks, depths, 101.0, 0.0005);
        CHECK(p.active_range() == 2);
        const double y = 0.1;
        const auto segs = p.swap(Side::Buy, y);
        REQUIRE(segs.size() == 1);
        const double expected = execution_rate(pool(101.0, 3000.0, 0.0005), Side::Buy, y);
        CHECK(segs[0].exec_rate == doctest::Approx(expected).epsilon(1e-12));
        CHECK(p.rate() > 101.0);
        // the rate moves to 1/(1/sqrt(Z) - y/kappa)^2
        CHECK(p.rate() == doctest::Approx(1 / std::pow(1 / std::sqrt(101.0) - y / 3000.0, 2)).epsilon(1e-12));

        TickedPool<double> q(ticks, depths, 101.0, 0.0005);
        const auto s = q.swap(Side::Sell, y);
        REQUIRE(s.size() == 1);
        CHECK(s[0].exec_rate == doctest::Approx(execution_rate(pool(101.0, 3000.0, 0.0005), Side::Sell, y)).epsilon(1e-12));
        CHECK(s[0].fee_x == doctest::Approx(0.0005 * y * s[0].exec_rate).epsilon(1e-12));
    }
    SUBCASE("crossing splits into segments at the tick") {
        TickedPool<double> p(ticks, depths, 104.0, 0.0);
        const auto segs = p.swap(Side::Buy, 5.0);
        REQUIRE(segs.size() == 2);
        CHECK(segs[0].rate_after == 105.0);
        CHECK(segs[0].depth == 3000.0);
        CHECK(segs[1].depth == 4000.0);
        CHECK(p.active_range() == 3);
        CHECK(segs[0].amount_y + segs[1].amount_y == doctest::Approx(5.0));

        TickedPool<double> q(ticks, depths, 96.0, 0.0005);
        const auto down = q.swap(Side::Sell, 2.0);
        REQUIRE(down.size() == 2);
        CHECK(down[0].rate_after == 95.0);
        CHECK(q.active_range() == 0);
        CHECK(q.rate() < 95.0);
    }
    SUBCASE("running off the grid") {
        TickedPool<double> p(ticks, depths, 109.0, 0.0);
        CHECK_THROWS_AS(p.swap(Side::Buy, 1e6), LiquidityExhausted);
    }
    CHECK_THROWS_AS(TickedPool<double>(ticks, {1, 2}, 100.0, 0.0), DomainError);
}
