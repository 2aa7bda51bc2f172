#include <cmath>
#include <sstream>

#include "clmm/errors.hpp"
#include "clmm/events.hpp"
#include "doctest.h"

using namespace clmm;

namespace {

std::vector<MarketEvent> parse(const std::string& body, const EventReadOptions& opt = {}) {
    std::istringstream in(std::string(kEventHeader) + "\n" + body);
    return read_events(in, opt);
}

}  // namespace

TEST_CASE("csv records") {
    CHECK(split_csv_record("a,,\"b,c\",\"d\"\"e\"") == std::vector<std::string>{"a", "", "b,c", "d\"e"});
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("q\"") == "\"q\"\"\"");
}

TEST_CASE("read swaps, mints and burns") {
    const auto ev = parse(
        "100,swap,buy,2,1000.5,1.0005,5000,1001,,,,\n"
        "101,mint,,,,,,,0xab,-10,20,300\n"
        "102,burn,,,,,,,0xab,-10,20,300\n"
        "103,swap,sell,1,999,0.4995,5000,998,,,,\n");
    REQUIRE(ev.size() == 4);
    CHECK(ev[0].is_swap());
    CHECK(ev[0].side == Side::Buy);
    CHECK(ev[0].notional() == doctest::Approx(2001.0));
    CHECK(ev[1].kind == EventKind::Mint);
    CHECK(ev[1].wallet == "0xab");
    CHECK(ev[1].tick_lower == -10);
    CHECK(ev[1].tick_upper == 20);
    CHECK(ev[2].kind == EventKind::Burn);
    CHECK(ev[3].side == Side::Sell);
}

TEST_CASE("malformed input is a data error") {
    CHECK_THROWS_AS(parse("100,swap,buy,2,1000,1,5000\n"), DataError);
    CHECK_THROWS_AS(parse("100,swop,buy,2,1000,1,5000,1001,,,,\n"), DataError);
    CHECK_THROWS_AS(parse("x,swap,buy,2,1000,1,5000,1001,,,,\n"), DataError);
    CHECK_THROWS_AS(parse("100,swap,buy,-2,1000,1,5000,1001,,,,\n"), DataError);
    CHECK_THROWS_AS(parse("100,mint,,,,,,,0xab,20,-10,300\n"), DataError);
    std::istringstream bad_header("ts,kind\n");
    CHECK_THROWS_AS(read_events(bad_header), DataError);
}

TEST_CASE("fee consistency check") {
    EventReadOptions opt;
    opt.fee_tier = 0.0005;
    CHECK_NOTHROW(parse("100,swap,buy,2,1000,1,5000,1001,,,,\n", opt));
    CHECK_THROWS_AS(parse("100,swap,buy,2,1000,2,5000,1001,,,,\n", opt), DataError);
}

TEST_CASE("write and read back") {
    MarketEvent s;
    s.ts = 5;
    s.side = Side::Sell;
    s.amount_y = 0.1 + 0.2;
    s.exec_rate = 1.0 / 3.0;
    s.fee_x = 1e-20;
    s.pool_depth = 12345.678;
    s.rate_after = 0.3333;
    MarketEvent m;
    m.ts = 6;
    m.kind = EventKind::Mint;
    m.wallet = "w,1";
    m.tick_lower = -60;
    m.tick_upper = 60;
    m.position_depth = 7.5;
    const std::vector<MarketEvent> in{s, m};
    std::ostringstream os;
    write_events(os, in);
    std::istringstream is(os.str());
    const auto out = read_events(is);
    REQUIRE(out.size() == 2);
    CHECK(out[0].amount_y == s.amount_y);
    CHECK(out[0].exec_rate == s.exec_rate);
    CHECK(out[0].fee_x == s.fee_x);
    CHECK(out[1].wallet == "w,1");
    CHECK(out[1].position_depth == 7.5);
    CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("ticks and fee-free rates") {
    CHECK(tick_to_rate(0) == 1.0);
    CHECK(tick_to_rate(10) == doctest::Approx(std::pow(1.0001, 10)).epsilon(1e-14));
    MarketEvent buy;
    buy.exec_rate = 1000.0;
    CHECK(fee_free_rate(buy, 0.003) == doctest::Approx(997.0));
    buy.side = Side::Sell;
    CHECK(fee_free_rate(buy, 0.003) == doctest::Approx(1000.0 / 0.997));
}

TEST_CASE("swaps only keeps time order") {
    MarketEvent a, b, m;
    a.ts = 100;
    b.ts = 99;
    m.ts = 101;
    m.kind = EventKind::Mint;
    const std::vector<MarketEvent> ev{m, a, b};
    const auto s = swaps_only(ev);
    REQUIRE(s.size() == 2);
    CHECK(s[0].ts == 99);
    CHECK(s[1].ts == 100);
    CHECK_THROWS_AS(parse("100,swap,buy,2,1000,1,5000,1001,,,,\n99,swap,buy,2,1000,1,5000,1001,,,,\n"), DataError);
}
