#include <cmath>

#include "clmm/errors.hpp"
#include "clmm/estimation.hpp"
#include "clmm/synthetic.hpp"
#include "doctest.h"

using namespace clmm;

namespace {

MarketEvent swap_at(std::int64_t ts, double rate, double amount = 1.0, double depth = 1000.0) {
    MarketEvent e;
    e.ts = ts;
    e.amount_y = amount;
    e.exec_rate = rate;
    e.fee_x = 0.0005 * amount * rate;
    e.pool_depth = depth;
    e.rate_after = rate;
    return e;
}

}  // namespace

TEST_CASE("bars forward fill the rate and bucket volume") {
    const std::vector<MarketEvent> s{swap_at(5, 100.0, 1.0), swap_at(60, 101.0, 2.0), swap_at(70, 102.0, 3.0),
                                     swap_at(200, 103.0, 1.0)};
    const auto b = make_bars(s, 60);
    CHECK(b.start == 60);
    REQUIRE(b.rate.size() == 4);
    // the swap stamped exactly 60 lands after the sample at 60
    CHECK(b.rate[0] == 100.0);
    CHECK(b.rate[1] == 102.0);
    CHECK(b.rate[2] == 102.0);
    CHECK(b.volume[0] == 0.0);
    CHECK(b.volume[1] == doctest::Approx(2 * 101.0 + 3 * 102.0));
    CHECK(b.volume[2] == 0.0);
    CHECK(b.rate[3] == 103.0);
    CHECK(b.volume[3] == doctest::Approx(103.0));
    CHECK(b.swaps[1] == 2);
    CHECK(b.time(2) == 180);

    MarketEvent mint;
    mint.kind = EventKind::Mint;
    CHECK_THROWS_AS(make_bars(std::vector<MarketEvent>{mint}, 60), DataError);
    CHECK_THROWS_AS(make_bars(s, 5, 60, 2), DataError);
}

TEST_CASE("sigma is the population deviation of log returns scaled to a day") {
    Eigen::VectorXd z(4);
    z << 100, 101, 100, 102;
    const Eigen::VectorXd r = log_returns(z);
    const double m = (r[0] + r[1] + r[2]) / 3;
    const double var = ((r[0] - m) * (r[0] - m) + (r[1] - m) * (r[1] - m) + (r[2] - m) * (r[2] - m)) / 3;
    CHECK(estimate_sigma(z, 60.0) == doctest::Approx(std::sqrt(var * 1440)).epsilon(1e-14));
    Eigen::VectorXd flat = Eigen::VectorXd::Constant(5, 7.0);
    CHECK(estimate_sigma(flat, 60.0) == 0.0);
    Eigen::VectorXd bad(2);
    bad << 1.0, -1.0;
    CHECK_THROWS(log_returns(bad));
}

TEST_CASE("pool fee rate") {
    // tau V / (2 kappa sqrt Z)
    CHECK(estimate_pool_fee_rate(1e6, 1e4, 100.0, 0.0005) == doctest::Approx(0.0005 * 1e6 / (2e4 * 10)));
    CHECK(estimate_pool_fee_rate(1e6, 1e4, 100.0, 0.0005, 0.5) ==
          doctest::Approx(2 * estimate_pool_fee_rate(1e6, 1e4, 100.0, 0.0005)));
    const std::vector<MarketEvent> none;
    const auto e = estimate_pool_fee_rate(none, 1e4, 100.0, 0.0005);
    CHECK(e.empty);
    CHECK(e.fee_rate == 0.0);
}

TEST_CASE("drift") {
    Eigen::VectorXd z(3), t(3);
    z << 100, 100 * std::exp(0.01), 100 * std::exp(0.02);
    t << 0, 43200, 86400;
    CHECK(estimate_drift(z, t) == doctest::Approx(0.01 / 0.5));
}

TEST_CASE("rate series lookup") {
    RateSeries s{{10, 20}, {1.0, 2.0}};
    CHECK(s.at(10) == 1.0);
    CHECK(s.at(19) == 1.0);
    CHECK(s.at(25) == 2.0);
    CHECK_THROWS_AS(s.at(9), DataError);
}

TEST_CASE("gamma regression on exact data") {
    const double pi = 0.03, gamma = 2e-6, m = 1.0 / 24;
    const Eigen::VectorXd d = default_spread_grid(50);
    CHECK(d[0] == doctest::Approx(0.0005));
    CHECK(d[49] == doctest::Approx(0.05));
    Eigen::VectorXd p(d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) p[i] = (4 * pi / d[i] - gamma / (d[i] * d[i])) * m;
    const auto g = estimate_gamma(d, p, m);
    CHECK(g.gamma == doctest::Approx(gamma).epsilon(1e-9));
    CHECK(g.fee_rate == doctest::Approx(pi).epsilon(1e-9));
    CHECK(g.r_squared == doctest::Approx(1.0));
}

TEST_CASE("realized fee revenue on the exact design") {
    GammaDesignConfig c;
    c.noise = false;
    c.windows = 3;
    const auto d = generate_gamma_design(c);
    for (double delta : {0.001, 0.01, 0.04}) {
        const double expected = (4 * c.fee_rate / delta - c.gamma / (delta * delta)) * d.horizon_days;
        CHECK(realized_fee_revenue(d.swaps, d.reference, delta, d.options) ==
              doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("correlation") {
    Eigen::VectorXd a(4), b(4);
    a << 1, 2, 3, 4;
    b << 2, 4, 6, 8;
    CHECK(correlation(a, b) == doctest::Approx(1.0));
    CHECK(correlation(a, -b) == doctest::Approx(-1.0));
    CHECK(std::isnan(correlation(a, Eigen::VectorXd::Ones(4))));
}
