#ifndef CLMM_STRATEGY_HPP
#define CLMM_STRATEGY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "clmm/core.hpp"

namespace clmm {

/// Market state and preferences the closed-form policy consumes. All rates
/// are per day; the rebalancing cost zeta is folded into the drift.
struct PolicyInputs {
    double fee_rate{0};
    double sigma{0};
    double drift{0};
    double gamma{0};
    double zeta{0};
    double epsilon{0};

    double effective_drift() const { return drift - zeta; }
};

enum class Violation : std::uint32_t {
    NotProfitable = 1u << 0,            // pi < eta
    BelowSymmetricFloor = 1u << 1,      // pi - gamma/8 < sigma^2/8 with zero drift
    BelowProfitabilityFloor = 1u << 2,  // drift-adjusted version of the floor above
    DriftOutOfRange = 1u << 3,          // |mu| > 1
    SpreadOutOfBox = 1u << 4,           // not 2|mu| <= delta <= 4 - 2|mu|
    NonViable = 1u << 5,                // delta > 4
    ZeroSpread = 1u << 6,               // gamma = 0 and mu = 0
};

struct Admissibility {
    std::uint32_t codes{0};

    bool ok() const { return codes == 0; }
    bool has(Violation v) const { return (codes & static_cast<std::uint32_t>(v)) != 0; }
    void add(Violation v) { codes |= static_cast<std::uint32_t>(v); }
    std::vector<std::string> names() const;
};

std::string to_string(Violation v);

struct PolicyOutput {
    double spread{0};
    double delta_lower{0};
    double delta_upper{0};
    double asymmetry{0};
    double threshold{0};
    Admissibility admissibility;
    bool floored{false};  // tick-width floor replaced a zero spread
};

/// eta = sigma^2/8 - (mu/4)(mu - sigma^2/2) + epsilon/4
double profitability_threshold(double sigma, double drift, double epsilon);

/// rho = 1/2 + mu/delta
double asymmetry(double spread, double drift);

/// delta* = (2 gamma + mu^2 sigma^2) / (4 (pi - eta) + epsilon), with mu the
/// effective drift. Throws NotProfitable when pi < eta.
double optimal_spread(const PolicyInputs& in);

/// The same spread computed through the expanded denominator
/// 4 pi - sigma^2/2 + mu (mu - sigma^2/2).
double optimal_spread_expanded(const PolicyInputs& in);

/// (delta_l*, delta_u*) = (delta*/2 - mu, delta*/2 + mu).
SpreadLegs<double> optimal_legs(const PolicyInputs& in);

/// All practical constraints violated by a spread and its legs. Diagnostic
/// only: nothing is clamped.
Admissibility check_admissibility(const PolicyInputs& in, double spread, const SpreadLegs<double>& legs);

/// Full evaluation: spread, legs, asymmetry, threshold and reason codes.
/// A zero spread is replaced by `tick_spread` when that is positive.
PolicyOutput evaluate_policy(const PolicyInputs& in, double tick_spread = 0.0);

}  // namespace clmm

#endif  // CLMM_STRATEGY_HPP
