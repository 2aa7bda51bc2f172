#include "clmm/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace clmm {

namespace {

// Comparisons against closed-form boundaries tolerate round-off so that a
// point constructed exactly on a boundary counts as satisfying it.
bool at_least(double lhs, double rhs) {
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    return lhs >= rhs - 1e-12 * scale;
}

}  // namespace

std::string to_string(Violation v) {
    switch (v) {
        case Violation::NotProfitable: return "not_profitable";
        case Violation::BelowSymmetricFloor: return "below_symmetric_floor";
        case Violation::BelowProfitabilityFloor: return "below_profitability_floor";
        case Violation::DriftOutOfRange: return "drift_out_of_range";
        case Violation::SpreadOutOfBox: return "spread_out_of_box";
        case Violation::NonViable: return "non_viable";
        case Violation::ZeroSpread: return "zero_spread";
    }
    return "unknown";
}

std::vector<std::string> Admissibility::names() const {
    std::vector<std::string> out;
    for (std::uint32_t bit = 1; bit <= static_cast<std::uint32_t>(Violation::ZeroSpread); bit <<= 1)
        if (codes & bit) out.push_back(to_string(static_cast<Violation>(bit)));
    return out;
}

double profitability_threshold(double sigma, double drift, double epsilon) {
    const double s2 = sigma * sigma;
    return s2 / 8.0 - drift / 4.0 * (drift - s2 / 2.0) + epsilon / 4.0;
}

double asymmetry(double spread, double drift) {
    if (!(spread > 0)) throw DomainError("asymmetry needs a positive spread");
    return 0.5 + drift / spread;
}

double optimal_spread(const PolicyInputs& in) {
    if (!(in.epsilon > 0)) throw DomainError("epsilon must be positive");
    if (!(in.gamma >= 0)) throw DomainError("gamma must be nonnegative");
    const double mu = in.effective_drift();
    const double eta = profitability_threshold(in.sigma, mu, in.epsilon);
    if (in.fee_rate < eta) throw NotProfitable("pool fee rate is below the profitability threshold");
    return (2.0 * in.gamma + mu * mu * in.sigma * in.sigma) / (4.0 * (in.fee_rate - eta) + in.epsilon);
}

double optimal_spread_expanded(const PolicyInputs& in) {
    const double mu = in.effective_drift();
    const double s2 = in.sigma * in.sigma;
    return (2.0 * in.gamma + mu * mu * s2) / (4.0 * in.fee_rate - s2 / 2.0 + mu * (mu - s2 / 2.0));
}

SpreadLegs<double> optimal_legs(const PolicyInputs& in) {
    const double spread = optimal_spread(in);
    const double mu = in.effective_drift();
    return {spread / 2.0 - mu, spread / 2.0 + mu};
}

Admissibility check_admissibility(const PolicyInputs& in, double spread, const SpreadLegs<double>& legs) {
    Admissibility a;
    const double mu = in.effective_drift();
    const double s2 = in.sigma * in.sigma;
    const double eta = profitability_threshold(in.sigma, mu, in.epsilon);
    if (!at_least(in.fee_rate, eta)) a.add(Violation::NotProfitable);
    const double adjusted = in.fee_rate - in.gamma / 8.0;
    if (mu == 0.0 && !at_least(adjusted, s2 / 8.0)) a.add(Violation::BelowSymmetricFloor);
    const double floor = s2 / 8.0 * (mu * mu / 2.0 + 1.0) - mu / 4.0 * (mu - s2 / 2.0);
    if (!at_least(adjusted, floor)) a.add(Violation::BelowProfitabilityFloor);
    if (std::abs(mu) > 1.0) a.add(Violation::DriftOutOfRange);
    if (std::isfinite(spread)) {
        if (!at_least(spread, 2.0 * std::abs(mu)) || !at_least(4.0 - 2.0 * std::abs(mu), spread))
            a.add(Violation::SpreadOutOfBox);
        if (!at_least(4.0, spread)) a.add(Violation::NonViable);
        if (spread == 0.0) a.add(Violation::ZeroSpread);
    } else {
        a.add(Violation::NonViable);
    }
    if (!(legs.lower >= 0 && legs.upper >= 0) && !a.has(Violation::SpreadOutOfBox)) a.add(Violation::SpreadOutOfBox);
    return a;
}

PolicyOutput evaluate_policy(const PolicyInputs& in, double tick_spread) {
    PolicyOutput out;
    const double mu = in.effective_drift();
    out.threshold = profitability_threshold(in.sigma, mu, in.epsilon);
    double spread = std::numeric_limits<double>::quiet_NaN();
    try {
        spread = optimal_spread(in);
    } catch (const NotProfitable&) {
    }
    if (std::isnan(spread)) {
        out.spread = out.delta_lower = out.delta_upper = out.asymmetry = spread;
        out.admissibility.add(Violation::NotProfitable);
        // Diagnose the remaining constraints on the threshold itself.
        const auto rest = check_admissibility(in, std::numeric_limits<double>::infinity(), {0, 0});
        out.admissibility.codes |= rest.codes;
        return out;
    }
    out.spread = spread;
    out.delta_lower = spread / 2.0 - mu;
    out.delta_upper = spread / 2.0 + mu;
    out.admissibility = check_admissibility(in, spread, {out.delta_lower, out.delta_upper});
    if (spread == 0.0 && tick_spread > 0.0) {
        out.spread = tick_spread;
        out.delta_lower = out.delta_upper = tick_spread / 2.0;
        out.floored = true;
    }
    out.asymmetry = out.spread > 0 ? asymmetry(out.spread, mu) : std::numeric_limits<double>::quiet_NaN();
    return out;
}

}  // namespace clmm
