#include <cmath>
#include <memory>

#include "clmm/value_function.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace clmm;

namespace {

ValueFunctionParams base() { return {0.02, 5e-7, 1e-4, 2.0, 0.002, 0.01, 1.0}; }

oracle::OdeParams ode(const ValueFunctionParams& p, double mu) {
    return {p.sigma, p.gamma, p.epsilon, p.fee_speed, p.fee_mean, p.fee_vol, p.horizon, mu};
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("quadrature") {
    CHECK(integrate([](double x) { return std::exp(x); }, 0.0, 1.0) == doctest::Approx(std::exp(1.0) - 1).epsilon(1e-13));
    CHECK(integrate([](double x) { return x * x; }, 2.0, 0.0) == doctest::Approx(-8.0 / 3));
    CHECK(integrate([](double) { return 1.0; }, 1.0, 1.0) == 0.0);
    QuadratureOptions tight{1e-16, 0.0, 2};
    CHECK_THROWS_AS(integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0, tight), NumericError);
}

TEST_CASE("terminal condition") {
    const auto p = base();
    CHECK(value_function(1.0, 3.0, 0.01, 0.05, p) == std::log(3.0));
    const auto c = value_coefficients(1.0, 0.0, p);
    CHECK(c.C == 0.0);
    CHECK(c.E == 0.0);
    CHECK(c.F == 0.0);
}

TEST_CASE("closed form against the ODE oracle") {
    const auto p = base();
    for (double mu : {-0.1, 0.0, 0.05})
        for (double t : {0.0, 0.3, 0.9}) {
            const auto c = value_coefficients(t, mu, p);
            const auto o = oracle::coefficients_rk4(ode(p, mu), t, 4000);
            CHECK(rel(c.C, o[0]) < 1e-9);
            CHECK(rel(c.E, o[1]) < 1e-9);
            CHECK(rel(c.F, o[2]) < 1e-9);
        }
}

TEST_CASE("fast mean reversion leaves only the time integrals") {
    auto p = base();
    const double k = concentration_weight(p, 0.0);
    p.fee_speed = 1e4;
    const auto c = value_coefficients(0.0, 0.0, p);
    CHECK(c.C * p.fee_speed == doctest::Approx(4 * k).epsilon(1e-9));
    p.fee_speed = 1e5;
    const auto d = value_coefficients(0.0, 0.0, p);
    const double q = 0.01;
    CHECK(std::abs(d.C * q * q + d.E * q) < 1e-3 * std::abs(d.F));
    CHECK(std::abs(d.C * q * q + d.E * q) < 0.2 * std::abs(c.C * q * q + c.E * q));
}

TEST_CASE("Monte Carlo value agrees with the closed form for a constant drift") {
    const auto p = base();
    ConstantDrift drift(0.05);
    const auto mc = value_function_mc(0.2, 1.5, 0.01, 0.05, drift, p, {8, 2000, 1, 2});
    const double exact = value_function(0.2, 1.5, 0.01, 0.05, p);
    CHECK(rel(mc.value, exact) < 1e-9);
    CHECK(mc.std_error == 0.0);
}

TEST_CASE("Monte Carlo value with a stochastic drift is deterministic and sane") {
    const auto p = base();
    OrnsteinUhlenbeckDrift ou(0.05, 5.0, 0.05, 0.0);
    const auto quiet = value_function_mc(0.0, 1.0, 0.01, 0.05, ou, p, {16, 1000, 3, 1});
    CHECK(rel(quiet.value, value_function(0.0, 1.0, 0.01, 0.05, p)) < 1e-9);

    OrnsteinUhlenbeckDrift noisy(0.05, 5.0, 0.05, 0.1);
    const auto a = value_function_mc(0.0, 1.0, 0.01, 0.05, noisy, p, {200, 200, 3, 1});
    const auto b = value_function_mc(0.0, 1.0, 0.01, 0.05, noisy, p, {200, 200, 3, 6});
    CHECK(a.value == b.value);
    CHECK(a.std_error > 0);
    // drift uncertainty lowers 1/(2 gamma + mu^2 sigma^2) on average
    CHECK(a.value < value_function(0.0, 1.0, 0.01, 0.0, p));
}

TEST_CASE("HJB residual") {
    const auto p = base();
    HjbGrid g;
    g.times = g.fee_rates = g.drifts = 6;
    const auto r = hjb_residual(p, g);
    CHECK(r.max_residual < 1e-6);

    SUBCASE("perturbing C is detected") {
        auto perturbed = hjb_residual(
            [&](double mu) -> ValueEvaluator {
                return [=](double t, double x, double q) {
                    auto c = value_coefficients(t, mu, p);
                    c.C *= 1.01;
                    return std::log(x) + (c.C * q + c.E) * q + c.F;
                };
            },
            p, g);
        CHECK(perturbed.max_residual > 1e-4);
    }
    SUBCASE("terminal slice") {
        HjbGrid last = g;
        last.times = 2;
        CHECK(hjb_residual(p, last).max_residual < 1e-6);
    }
}
