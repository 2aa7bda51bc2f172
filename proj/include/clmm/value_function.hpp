#ifndef CLMM_VALUE_FUNCTION_HPP
#define CLMM_VALUE_FUNCTION_HPP

#include <cstdint>
#include <functional>
#include <memory>

#include "clmm/quadrature.hpp"
#include "clmm/stochastics.hpp"

namespace clmm {

/// Parameters of the log-utility control problem. The state is
/// (t, wealth, excess fee rate pi~ = pi - eta, drift mu).
struct ValueFunctionParams {
    double sigma{0.02};
    double gamma{5e-7};
    double epsilon{1e-4};
    double fee_speed{2.0};   // Gamma
    double fee_mean{0.002};  // pi bar
    double fee_vol{0.01};    // psi
    double horizon{1.0};     // T in days

    void validate() const;
    static ValueFunctionParams from(const ModelParams& m, double horizon);
};

/// w = log(wealth) + C pi~^2 + E pi~ + F
struct ValueCoefficients {
    double C{0};
    double E{0};
    double F{0};
};

/// 1 / (2 gamma + mu^2 sigma^2)
double concentration_weight(const ValueFunctionParams& p, double mu);

/// Coefficients for a constant drift: C in closed form, E and F by adaptive
/// quadrature in time.
ValueCoefficients value_coefficients(double t, double mu, const ValueFunctionParams& p,
                                     const QuadratureOptions& opt = {});

/// Value function for a constant drift.
double value_function(double t, double wealth, double excess_fee_rate, double mu, const ValueFunctionParams& p,
                      const QuadratureOptions& opt = {});

struct MonteCarloValueOptions {
    std::size_t paths{2000};
    std::size_t steps{400};  // time steps on [t, T]
    std::uint64_t seed{1};
    unsigned workers{0};
};

struct MonteCarloValue {
    double value{0};
    double std_error{0};
};

/// Value function when mu follows `drift` started at mu0. The CIR moments
/// of pi~ are exact; the expectation over drift paths is Monte Carlo with
/// Simpson's rule on the time grid. Deterministic for any worker count.
MonteCarloValue value_function_mc(double t, double wealth, double excess_fee_rate, double mu0,
                                  const DriftProcess& drift, const ValueFunctionParams& p,
                                  const MonteCarloValueOptions& opt = {});

/// Evaluator w(t, wealth, pi~) for a fixed drift.
using ValueEvaluator = std::function<double(double t, double wealth, double excess_fee_rate)>;

struct HjbResidual {
    double max_residual{0};  // max over grid of |HJB| / largest |term|
    double max_absolute{0};  // max over grid of |HJB|
    double t{0}, excess_fee_rate{0}, mu{0};  // location of max_residual
};

struct HjbGrid {
    std::size_t times{20};
    std::size_t fee_rates{20};
    std::size_t drifts{20};
    double fee_rate_max{0.05};
    double drift_min{-0.1};
    double drift_max{0.1};
    double wealth{1.0};
    double time_step{1e-3};  // finite-difference step in t, fraction of T
};

/// Plugs w and the maximiser delta* into the HJB generator with finite
/// differences in t, wealth and pi~. `make_evaluator(mu)` supplies w for
/// each drift on the grid.
HjbResidual hjb_residual(const std::function<ValueEvaluator(double mu)>& make_evaluator,
                         const ValueFunctionParams& p, const HjbGrid& grid = {});

/// Convenience: residual of the closed-form value function.
HjbResidual hjb_residual(const ValueFunctionParams& p, const HjbGrid& grid = {}, const QuadratureOptions& opt = {});

}  // namespace clmm

#endif  // CLMM_VALUE_FUNCTION_HPP
