#include <cmath>
#include <memory>
#include <sstream>

#include "clmm/errors.hpp"
#include "clmm/parallel.hpp"
#include "clmm/random.hpp"
#include "clmm/stochastics.hpp"
#include "clmm/strategy.hpp"
#include "doctest.h"

using namespace clmm;

namespace {

ModelParams params(double sigma, double mu = 0.0) {
    ModelParams p;
    p.sigma = sigma;
    p.drift = std::make_shared<ConstantDrift>(mu);
    return p;
}

FeeRatePath constant_fee(double pi, std::size_t steps) {
    return {Eigen::VectorXd::Constant(static_cast<Eigen::Index>(steps + 1), pi),
            Eigen::VectorXd::Zero(static_cast<Eigen::Index>(steps + 1)), 0};
}

}  // namespace

TEST_CASE("random streams are keyed by path") {
    NormalStream a(1, Stream::Rate, 3), b(1, Stream::Rate, 3), c(1, Stream::FeeRate, 3), d(1, Stream::Rate, 4);
    const double x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
}

TEST_CASE("rate path") {
    TimeGrid grid{1.0 / 1440, 1440};
    SUBCASE("flat without volatility or drift") {
        const auto r = simulate_rate_path(params(0.0), 100.0, grid, 1);
        CHECK((r.rate.array() - 100.0).abs().maxCoeff() < 1e-12);
    }
    SUBCASE("deterministic exponential") {
        const auto r = simulate_rate_path(params(0.0, 0.3), 100.0, grid, 1);
        CHECK(r.rate[r.rate.size() - 1] == doctest::Approx(100.0 * std::exp(0.3)).epsilon(1e-12));
    }
    SUBCASE("log-rate mean") {
        const TimeGrid coarse{1.0 / 16, 16};
        const std::size_t n = 20000;
        Eigen::VectorXd end(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = simulate_rate_path(params(0.02), 1.0, coarse, 42, i);
            end[static_cast<Eigen::Index>(i)] = std::log(r.rate[16]);
        }
        const auto s = summarize(end);
        CHECK(std::abs(s.mean + 0.0002) < 3 * s.std_error);
        CHECK(s.std_dev == doctest::Approx(0.02).epsilon(0.03));
    }
    CHECK_THROWS_AS(simulate_rate_path(params(0.02), -1.0, grid, 1), DomainError);
}

TEST_CASE("OU drift") {
    OrnsteinUhlenbeckDrift ou(0.5, 3.0, 0.1, 0.0);
    double mu = ou.initial();
    for (int i = 0; i < 100; ++i) mu = ou.step(mu, 0.01, 1.0);
    CHECK(mu == doctest::Approx(0.1 + 0.4 * std::exp(-3.0)).epsilon(1e-12));
    OrnsteinUhlenbeckDrift walk(0.0, 0.0, 0.0, 2.0);
    CHECK(walk.step(1.0, 0.25, 1.0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(OrnsteinUhlenbeckDrift(0, -1, 0, 1), DomainError);
}

TEST_CASE("fee-rate path") {
    TimeGrid grid{1.0 / 1440, 1440};
    auto p = params(0.02);
    const Eigen::VectorXd drift = Eigen::VectorXd::Zero(1441);
    const double eta = profitability_threshold(0.02, 0.0, p.epsilon);
    SUBCASE("fixed point without noise") {
        p.fee_vol = 1e-300;
        const auto f = simulate_fee_rate_path(p, eta + p.fee_mean, drift, grid, 3);
        CHECK((f.excess.array() - p.fee_mean).abs().maxCoeff() < 1e-15);
    }
    SUBCASE("relaxation without noise") {
        p.fee_vol = 1e-300;
        const double x0 = 0.01;
        const auto f = simulate_fee_rate_path(p, eta + x0, drift, grid, 3);
        // Euler on a linear ODE: (1 - G dt)^n
        const double expected = p.fee_mean + (x0 - p.fee_mean) * std::pow(1 - p.fee_speed * grid.dt, 1440);
        CHECK(f.excess[1440] == doctest::Approx(expected).epsilon(1e-12));
        CHECK(f.excess[1440] == doctest::Approx(p.fee_mean + (x0 - p.fee_mean) * std::exp(-2.0)).epsilon(1e-3));
    }
    SUBCASE("first moment") {
        const TimeGrid coarse{1.0 / 64, 64};
        const Eigen::VectorXd d = Eigen::VectorXd::Zero(65);
        const std::size_t n = 20000;
        Eigen::VectorXd end(n);
        std::size_t truncated = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto f = simulate_fee_rate_path(p, eta + 0.01, d, coarse, 8, i);
            end[static_cast<Eigen::Index>(i)] = f.excess[64];
            truncated += f.truncated_steps;
            CHECK((f.excess.array() >= 0).all());
        }
        const auto s = summarize(end);
        const double target = p.fee_mean + (0.01 - p.fee_mean) * std::pow(1 - 2.0 / 64, 64);
        CHECK(std::abs(s.mean - target) < 3 * s.std_error);
        (void)truncated;
    }
    SUBCASE("precondition") {
        CHECK_THROWS_AS(simulate_fee_rate_path(p, eta, drift, grid, 3), PreconditionError);
    }
}

TEST_CASE("wealth path") {
    TimeGrid grid{1.0 / 1440, 1440};
    SUBCASE("deterministic growth") {
        auto p = params(0.0);
        p.gamma = 0.0;
        const auto rate = simulate_rate_path(p, 100.0, grid, 1);
        const auto fee = constant_fee(0.02, grid.steps);
        const auto w = simulate_wealth_path(p, 2.0, fixed_spread_policy(0.1), rate, fee, grid,
                                            Eigen::VectorXd::Zero(1440));
        CHECK(w.wealth[1440] == doctest::Approx(2.0 * std::exp(4 * 0.02 / 0.1)).epsilon(1e-12));
        CHECK(w.pl[1440] == 0.0);
    }
    SUBCASE("PL shrinks with the spread") {
        auto p = params(0.02);
        const auto rate = simulate_rate_path(p, 100.0, grid, 1);
        const auto fee = constant_fee(0.02, grid.steps);
        const Eigen::VectorXd noise = draw_noise(grid, 1, 0).rate;
        const auto narrow = simulate_wealth_path(p, 1.0, fixed_spread_policy(0.1), rate, fee, grid, noise);
        const auto wide = simulate_wealth_path(p, 1.0, fixed_spread_policy(3.9), rate, fee, grid, noise);
        CHECK(std::abs(wide.pl[1440]) < std::abs(narrow.pl[1440]));
        for (Eigen::Index i = 1; i <= 1440; ++i) CHECK(narrow.pl[i] <= narrow.pl[i - 1]);
        CHECK((narrow.wealth.array() > 0).all());
    }
    SUBCASE("inadmissible policy") {
        auto p = params(0.02);
        const auto rate = simulate_rate_path(p, 100.0, grid, 1);
        Policy bad = [](double, double, double, double) { return SpreadLegs<double>{0.0, 0.0}; };
        CHECK_THROWS_AS(simulate_wealth_path(p, 1.0, bad, rate, constant_fee(0.02, 1440), grid,
                                             Eigen::VectorXd::Zero(1440)),
                        InadmissiblePolicy);
    }
    SUBCASE("mean log wealth matches the drift integral") {
        auto p = params(0.02);
        const double pi = 0.02;
        PolicyInputs in{pi, 0.02, 0.0, p.gamma, 0.0, p.epsilon};
        const double delta = optimal_spread(in);
        const TimeGrid g{1.0 / 32, 32};
        const std::size_t n = 20000;
        Eigen::VectorXd end(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto noise = draw_noise(g, 5, i);
            const auto rate = simulate_rate_path(p, 100.0, g, noise);
            const auto w = simulate_wealth_path(p, 1.0, fixed_spread_policy(delta), rate, constant_fee(pi, 32), g,
                                                noise.rate);
            end[static_cast<Eigen::Index>(i)] = w.log_wealth[32];
        }
        const double s2 = 0.0004;
        const double drift = (4 * pi - s2 / 2) / delta - p.gamma / (delta * delta) - s2 / 8;
        const auto s = summarize(end);
        CHECK(std::abs(s.mean - drift) < 3 * s.std_error + 1e-9 * std::abs(drift));
    }
}

TEST_CASE("pl accrual") {
    TimeGrid grid{0.25, 4};
    const Eigen::VectorXd w = Eigen::VectorXd::Ones(5), d = Eigen::VectorXd::Constant(4, 4.0);
    CHECK(pl_accrual(w, d, 0.0, grid).cwiseAbs().maxCoeff() == 0.0);
    const auto pl = pl_accrual(w, d, 0.2, grid);
    CHECK(pl[4] == doctest::Approx(-0.04 / 8));
    const Eigen::VectorXd tick = Eigen::VectorXd::Constant(4, 1e-4);
    CHECK(pl_accrual(w, tick, 0.2, grid)[4] == doctest::Approx(-0.04 / 2e-4));
    CHECK_THROWS_AS(pl_accrual(Eigen::VectorXd::Ones(7), d, 0.2, grid), ShapeError);
}

TEST_CASE("bundle export and determinism across workers") {
    auto p = params(0.02);
    const TimeGrid grid{1.0 / 8, 8};
    const InitialState init{100.0, 0.03, 1.0};
    const auto b = simulate_bundle(p, init, optimal_policy(p), grid, 9);
    std::ostringstream os;
    write_bundle_csv(os, b);
    const auto text = os.str();
    CHECK(text.rfind("t,Z,mu,pi,wealth,pl\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 10);

    const std::vector<Policy> policies{optimal_policy(p), fixed_spread_policy(0.05)};
    const auto one = terminal_log_wealth(p, init, policies, grid, 64, 17, 1);
    const auto many = terminal_log_wealth(p, init, policies, grid, 64, 17, 5);
    CHECK((one.array() == many.array()).all());
}

TEST_CASE("parallel_for covers every index once and rethrows") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 7, [&](std::size_t i) { hits[i] += 1; });
    CHECK(std::count(hits.begin(), hits.end(), 1) == 1000);
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                        if (i == 5) throw NumericError("x");
                    }),
                    NumericError);
}

TEST_CASE("noise independence") {
    const TimeGrid grid{1.0, 20000};
    const auto n = draw_noise(grid, 2, 0);
    const double corr = (n.rate.array() * n.fee_rate.array()).mean();
    CHECK(std::abs(corr) < 3.0 / std::sqrt(20000.0));
}
