#include "clmm/value_function.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "clmm/errors.hpp"
#include "clmm/parallel.hpp"
#include "clmm/random.hpp"
#include "clmm/strategy.hpp"

namespace clmm {

void ValueFunctionParams::validate() const {
    if (!(sigma >= 0)) throw DomainError("sigma must be nonnegative");
    if (!(gamma >= 0)) throw DomainError("gamma must be nonnegative");
    if (!(epsilon > 0)) throw DomainError("epsilon must be positive");
    if (!(fee_speed > 0) || !(fee_mean > 0) || !(fee_vol >= 0)) throw DomainError("invalid CIR parameters");
    if (!(horizon > 0)) throw DomainError("horizon must be positive");
}

ValueFunctionParams ValueFunctionParams::from(const ModelParams& m, double horizon) {
    return {m.sigma, m.gamma, m.epsilon, m.fee_speed, m.fee_mean, m.fee_vol, horizon};
}

double concentration_weight(const ValueFunctionParams& p, double mu) {
    const double denom = 2.0 * p.gamma + mu * mu * p.sigma * p.sigma;
    if (!(denom > 0)) throw DomainError("2 gamma + mu^2 sigma^2 must be positive");
    return 1.0 / denom;
}

ValueCoefficients value_coefficients(double t, double mu, const ValueFunctionParams& p,
                                     const QuadratureOptions& opt) {
    p.validate();
    if (t > p.horizon) throw DomainError("t must not exceed the horizon");
    const double k = concentration_weight(p, mu);
    const double G = p.fee_speed, T = p.horizon;
    if (t == T) return {};
    // C(s) solves C' = 2 G C - 8k, C(T) = 0.
    auto C = [&](double s) { return 8.0 * k * (-std::expm1(-2.0 * G * (T - s))) / (2.0 * G); };
    // E(t) = int_t^T g(s) e^{-G (s - t)} ds with g = (2 G pibar + psi^2) C + 4 eps k
    auto g = [&](double s) { return (2.0 * G * p.fee_mean + p.fee_vol * p.fee_vol) * C(s) + 4.0 * p.epsilon * k; };
    ValueCoefficients out;
    out.C = C(t);
    out.E = integrate([&](double s) { return g(s) * std::exp(-G * (s - t)); }, t, T, opt);
    // int_t^T E(s) ds = int_t^T g(u) (1 - e^{-G (u - t)}) / G du
    const double integral_E = integrate([&](double u) { return g(u) * -std::expm1(-G * (u - t)) / G; }, t, T, opt);
    const double s2 = p.sigma * p.sigma;
    out.F = G * p.fee_mean * integral_E + (0.5 * p.epsilon * p.epsilon * k + mu / 2.0 - s2 / 8.0) * (T - t);
    return out;
}

double value_function(double t, double wealth, double excess_fee_rate, double mu, const ValueFunctionParams& p,
                      const QuadratureOptions& opt) {
    if (!(wealth > 0)) throw DomainError("wealth must be positive");
    if (t == p.horizon) return std::log(wealth);
    const auto c = value_coefficients(t, mu, p, opt);
    return std::log(wealth) + (c.C * excess_fee_rate + c.E) * excess_fee_rate + c.F;
}

MonteCarloValue value_function_mc(double t, double wealth, double excess_fee_rate, double mu0,
                                  const DriftProcess& drift, const ValueFunctionParams& p,
                                  const MonteCarloValueOptions& opt) {
    p.validate();
    if (!(wealth > 0)) throw DomainError("wealth must be positive");
    if (t > p.horizon) throw DomainError("t must not exceed the horizon");
    if (opt.paths == 0) throw DomainError("need at least one path");
    if (t == p.horizon) return {std::log(wealth), 0.0};
    const std::size_t n = opt.steps + (opt.steps % 2);  // Simpson needs an even count
    const double tau = p.horizon - t, h = tau / static_cast<double>(n);
    const double G = p.fee_speed, pibar = p.fee_mean, psi2 = p.fee_vol * p.fee_vol, eps = p.epsilon;

    // Deterministic weight on k(mu_s): 8 E[pi~_s^2] + 4 eps E[pi~_s] + eps^2 / 2
    std::vector<double> weight(n + 1), simpson(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double u = h * static_cast<double>(i);
        const double e1 = std::exp(-G * u);
        const double m1 = pibar + (excess_fee_rate - pibar) * e1;
        const double var = excess_fee_rate * psi2 / G * (e1 - e1 * e1) + pibar * psi2 / (2.0 * G) * (1 - e1) * (1 - e1);
        weight[i] = 8.0 * (var + m1 * m1) + 4.0 * eps * m1 + 0.5 * eps * eps;
        simpson[i] = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    }

    std::vector<double> per_path(opt.paths);
    parallel_for(opt.paths, opt.workers, [&](std::size_t path) {
        NormalStream noise(opt.seed, Stream::Drift, path);
        double mu = mu0, acc = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            acc += simpson[i] * (concentration_weight(p, mu) * weight[i] + mu / 2.0);
            if (i < n) mu = drift.step(mu, h, noise());
        }
        per_path[path] = acc * h / 3.0;
    });
    Eigen::Map<const Eigen::VectorXd> samples(per_path.data(), static_cast<Eigen::Index>(per_path.size()));
    const auto stats = summarize(samples);
    const double s2 = p.sigma * p.sigma;
    return {std::log(wealth) + stats.mean - s2 / 8.0 * tau, stats.std_error};
}

namespace {

struct Terms {
    double time, wealth_drift, wealth_diffusion, fee_drift, fee_diffusion;

    double sum() const { return time + wealth_drift + wealth_diffusion + fee_drift + fee_diffusion; }
    double largest() const {
        return std::max({std::abs(time), std::abs(wealth_drift), std::abs(wealth_diffusion), std::abs(fee_drift),
                         std::abs(fee_diffusion)});
    }
};

}  // namespace

HjbResidual hjb_residual(const std::function<ValueEvaluator(double mu)>& make_evaluator,
                         const ValueFunctionParams& p, const HjbGrid& grid) {
    p.validate();
    if (grid.times < 2 || grid.fee_rates < 2 || grid.drifts < 1) throw DomainError("HJB grid too small");
    const double T = p.horizon, s2 = p.sigma * p.sigma;
    const double ht = grid.time_step * T;
    const double x = grid.wealth, hx = 1e-3 * x;
    const double hp = 1e-3 * std::max(grid.fee_rate_max, 1e-6);
    HjbResidual out;
    for (std::size_t m = 0; m < grid.drifts; ++m) {
        const double mu = grid.drifts == 1 ? grid.drift_min
                                           : grid.drift_min + (grid.drift_max - grid.drift_min) * static_cast<double>(m) /
                                                                  static_cast<double>(grid.drifts - 1);
        const ValueEvaluator w = make_evaluator(mu);
        const double eta = profitability_threshold(p.sigma, mu, p.epsilon);
        for (std::size_t i = 0; i < grid.times; ++i) {
            const double t = T * static_cast<double>(i) / static_cast<double>(grid.times - 1);
            for (std::size_t j = 0; j < grid.fee_rates; ++j) {
                const double q = grid.fee_rate_max * static_cast<double>(j) / static_cast<double>(grid.fee_rates - 1);
                const double w0 = w(t, x, q);
                double wt;
                if (t + 2.0 * ht <= T) {
                    wt = (-w(t + 2 * ht, x, q) + 8 * w(t + ht, x, q) - 8 * w(t - ht, x, q) + w(t - 2 * ht, x, q)) /
                         (12.0 * ht);
                } else {
                    wt = (25 * w0 - 48 * w(t - ht, x, q) + 36 * w(t - 2 * ht, x, q) - 16 * w(t - 3 * ht, x, q) +
                          3 * w(t - 4 * ht, x, q)) /
                         (12.0 * ht);
                }
                const double xp2 = w(t, x + 2 * hx, q), xp1 = w(t, x + hx, q);
                const double xm1 = w(t, x - hx, q), xm2 = w(t, x - 2 * hx, q);
                const double wx = (-xp2 + 8 * xp1 - 8 * xm1 + xm2) / (12.0 * hx);
                const double wxx = (-xp2 + 16 * xp1 - 30 * w0 + 16 * xm1 - xm2) / (12.0 * hx * hx);
                const double qp = w(t, x, q + hp), qm = w(t, x, q - hp);
                const double wq = (qp - qm) / (2.0 * hp);
                const double wqq = (qp - 2 * w0 + qm) / (hp * hp);

                const double delta = (2.0 * p.gamma + mu * mu * s2) / (4.0 * q + p.epsilon);
                const double rho = 0.5 + mu / delta;
                const double pi = q + eta;
                const double drift = (4.0 * pi - s2 / 2.0) / delta + mu * rho - p.gamma / (delta * delta);
                const Terms terms{wt, x * drift * wx, 0.5 * x * x * s2 * rho * rho * wxx,
                                  p.fee_speed * (p.fee_mean - q) * wq, 0.5 * p.fee_vol * p.fee_vol * q * wqq};
                const double abs_res = std::abs(terms.sum());
                const double rel = abs_res / std::max(terms.largest(), 1e-300);
                out.max_absolute = std::max(out.max_absolute, abs_res);
                if (rel > out.max_residual || (i == 0 && j == 0 && m == 0)) {
                    out.max_residual = rel;
                    out.t = t;
                    out.excess_fee_rate = q;
                    out.mu = mu;
                }
            }
        }
    }
    return out;
}

HjbResidual hjb_residual(const ValueFunctionParams& p, const HjbGrid& grid, const QuadratureOptions& opt) {
    return hjb_residual(
        [&](double mu) -> ValueEvaluator {
            auto cache = std::make_shared<std::map<double, ValueCoefficients>>();
            return [=, &p](double t, double wealth, double q) {
                auto it = cache->find(t);
                if (it == cache->end()) it = cache->emplace(t, value_coefficients(t, mu, p, opt)).first;
                const auto& c = it->second;
                return std::log(wealth) + (c.C * q + c.E) * q + c.F;
            };
        },
        p, grid);
}

}  // namespace clmm
