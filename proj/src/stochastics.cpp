#include "clmm/stochastics.hpp"

#include <cmath>
#include <iomanip>

#include "clmm/errors.hpp"
#include "clmm/parallel.hpp"
#include "clmm/random.hpp"
#include "clmm/strategy.hpp"

namespace clmm {

void TimeGrid::validate() const {
    if (!(dt > 0) || !std::isfinite(dt)) throw DomainError("time step must be positive");
    if (steps == 0) throw DomainError("time grid needs at least one step");
}

OrnsteinUhlenbeckDrift::OrnsteinUhlenbeckDrift(double initial, double speed, double level, double vol)
    : initial_(initial), speed_(speed), level_(level), vol_(vol) {
    if (!(speed >= 0) || !(vol >= 0)) throw DomainError("OU speed and vol must be nonnegative");
}

double OrnsteinUhlenbeckDrift::step(double drift, double dt, double normal) const {
    if (speed_ == 0.0) return drift + vol_ * std::sqrt(dt) * normal;
    const double decay = std::exp(-speed_ * dt);
    const double sd = vol_ * std::sqrt((1.0 - decay * decay) / (2.0 * speed_));
    return level_ + (drift - level_) * decay + sd * normal;
}

void ModelParams::validate() const {
    if (!(sigma >= 0)) throw DomainError("sigma must be nonnegative");
    if (!drift) throw DomainError("drift process missing");
    if (!(fee_speed > 0) || !(fee_mean > 0)) throw DomainError("CIR speed and mean must be positive");
    if (!(fee_vol >= 0)) throw DomainError("CIR volatility must be nonnegative");
    if (!(epsilon > 0)) throw DomainError("epsilon must be positive");
    if (!(gamma >= 0)) throw DomainError("gamma must be nonnegative");
    if (!(zeta >= 0)) throw DomainError("zeta must be nonnegative");
    if (!(gas >= 0)) throw DomainError("gas must be nonnegative");
}

NoiseStreams draw_noise(const TimeGrid& grid, std::uint64_t seed, std::uint64_t path) {
    grid.validate();
    const auto n = static_cast<Eigen::Index>(grid.steps);
    NoiseStreams out{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
    NormalStream w(seed, Stream::Rate, path), b(seed, Stream::FeeRate, path), d(seed, Stream::Drift, path);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.rate[i] = w();
        out.fee_rate[i] = b();
        out.drift[i] = d();
    }
    return out;
}

Policy optimal_policy(const ModelParams& params) {
    const double sigma = params.sigma, gamma = params.gamma, zeta = params.zeta, epsilon = params.epsilon;
    return [=](double, double, double mu, double pi) {
        return optimal_legs(PolicyInputs{pi, sigma, mu, gamma, zeta, epsilon});
    };
}

Policy fixed_spread_policy(double spread, double asymmetry_shift, double zeta) {
    if (!(spread > 0)) throw InadmissiblePolicy("fixed spread must be positive");
    return [=](double, double, double mu, double) {
        const double rho = asymmetry(spread, mu - zeta) + asymmetry_shift;
        return SpreadLegs<double>{(1.0 - rho) * spread, rho * spread};
    };
}

RatePath simulate_rate_path(const ModelParams& params, double initial_rate, const TimeGrid& grid,
                            const NoiseStreams& noise) {
    grid.validate();
    if (!(initial_rate > 0)) throw DomainError("initial rate must be positive");
    const auto n = static_cast<Eigen::Index>(grid.steps);
    if (noise.rate.size() < n || noise.drift.size() < n) throw ShapeError("noise shorter than grid");
    RatePath out{Eigen::VectorXd(n + 1), Eigen::VectorXd(n + 1)};
    const double s2 = params.sigma * params.sigma, sq = std::sqrt(grid.dt);
    double log_z = std::log(initial_rate);
    double mu = params.drift->initial();
    out.rate[0] = initial_rate;
    out.drift[0] = mu;
    for (Eigen::Index i = 0; i < n; ++i) {
        log_z += (mu - s2 / 2.0) * grid.dt + params.sigma * sq * noise.rate[i];
        mu = params.drift->step(mu, grid.dt, noise.drift[i]);
        out.rate[i + 1] = std::exp(log_z);
        out.drift[i + 1] = mu;
    }
    return out;
}

RatePath simulate_rate_path(const ModelParams& params, double initial_rate, const TimeGrid& grid,
                            std::uint64_t seed, std::uint64_t path) {
    return simulate_rate_path(params, initial_rate, grid, draw_noise(grid, seed, path));
}

FeeRatePath simulate_fee_rate_path(const ModelParams& params, double initial_fee_rate,
                                   const Eigen::Ref<const Eigen::VectorXd>& drift, const TimeGrid& grid,
                                   const Eigen::Ref<const Eigen::VectorXd>& noise) {
    grid.validate();
    const auto n = static_cast<Eigen::Index>(grid.steps);
    if (drift.size() != n + 1) throw ShapeError("drift path must have steps + 1 entries");
    if (noise.size() < n) throw ShapeError("noise shorter than grid");
    auto eta = [&](double mu) { return profitability_threshold(params.sigma, mu, params.epsilon); };
    const double excess0 = initial_fee_rate - eta(drift[0]);
    if (!(excess0 > 0)) throw PreconditionError("initial fee rate must exceed the profitability threshold");

    FeeRatePath out{Eigen::VectorXd(n + 1), Eigen::VectorXd(n + 1), 0};
    const double sq = std::sqrt(grid.dt);
    // Full truncation: the drift and diffusion see max(x, 0), the state itself
    // may dip below zero; the reported excess is the truncated value.
    double x = excess0;
    out.excess[0] = excess0;
    out.fee_rate[0] = initial_fee_rate;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double xp = std::max(x, 0.0);
        x += params.fee_speed * (params.fee_mean - xp) * grid.dt + params.fee_vol * std::sqrt(xp) * sq * noise[i];
        if (x < 0) ++out.truncated_steps;
        out.excess[i + 1] = std::max(x, 0.0);
        out.fee_rate[i + 1] = out.excess[i + 1] + eta(drift[i + 1]);
    }
    return out;
}

FeeRatePath simulate_fee_rate_path(const ModelParams& params, double initial_fee_rate,
                                   const Eigen::Ref<const Eigen::VectorXd>& drift, const TimeGrid& grid,
                                   std::uint64_t seed, std::uint64_t path) {
    grid.validate();
    Eigen::VectorXd noise(static_cast<Eigen::Index>(grid.steps));
    NormalStream b(seed, Stream::FeeRate, path);
    for (Eigen::Index i = 0; i < noise.size(); ++i) noise[i] = b();
    return simulate_fee_rate_path(params, initial_fee_rate, drift, grid, noise);
}

WealthPath simulate_wealth_path(const ModelParams& params, double initial_wealth, const Policy& policy,
                                const RatePath& rate, const FeeRatePath& fee, const TimeGrid& grid,
                                const Eigen::Ref<const Eigen::VectorXd>& rate_noise) {
    grid.validate();
    if (!(initial_wealth > 0)) throw DomainError("initial wealth must be positive");
    const auto n = static_cast<Eigen::Index>(grid.steps);
    if (rate.rate.size() != n + 1 || rate.drift.size() != n + 1 || fee.fee_rate.size() != n + 1)
        throw ShapeError("paths must have steps + 1 entries");
    if (rate_noise.size() < n) throw ShapeError("noise shorter than grid");

    WealthPath out{Eigen::VectorXd(n + 1), Eigen::VectorXd(n + 1), Eigen::VectorXd(n + 1), Eigen::VectorXd(n),
                   Eigen::VectorXd(n)};
    const double sigma = params.sigma, s2 = sigma * sigma, dt = grid.dt, sq = std::sqrt(dt);
    double lw = std::log(initial_wealth), pl = 0.0;
    out.log_wealth[0] = lw;
    out.wealth[0] = initial_wealth;
    out.pl[0] = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mu = rate.drift[i], pi = fee.fee_rate[i];
        const auto legs = policy(grid.time(static_cast<std::size_t>(i)), rate.rate[i], mu, pi);
        const double delta = legs.spread();
        if (!(delta > 0) || !std::isfinite(delta)) throw InadmissiblePolicy("policy returned a nonpositive spread");
        const double rho = legs.upper / delta;
        const double wealth = out.wealth[i];
        pl -= s2 / 2.0 * wealth / delta * dt;
        lw += ((4.0 * pi - s2 / 2.0) / delta + (mu - params.zeta) * rho - params.gamma / (delta * delta) -
               s2 * rho * rho / 2.0) *
                  dt +
              sigma * rho * sq * rate_noise[i];
        out.delta_lower[i] = legs.lower;
        out.delta_upper[i] = legs.upper;
        out.log_wealth[i + 1] = lw;
        out.wealth[i + 1] = std::exp(lw);
        out.pl[i + 1] = pl;
    }
    return out;
}

Eigen::VectorXd pl_accrual(const Eigen::Ref<const Eigen::VectorXd>& wealth,
                           const Eigen::Ref<const Eigen::VectorXd>& spread, double sigma, const TimeGrid& grid) {
    if (wealth.size() != spread.size() && wealth.size() != spread.size() + 1)
        throw ShapeError("wealth and spread paths are misaligned");
    const Eigen::Index n = spread.size();
    Eigen::VectorXd pl(n + 1);
    pl[0] = 0.0;
    const double k = sigma * sigma / 2.0 * grid.dt;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(spread[i] > 0)) throw DomainError("spread must be positive");
        pl[i + 1] = pl[i] - k * wealth[i] / spread[i];
    }
    return pl;
}

PathBundle simulate_bundle(const ModelParams& params, const InitialState& init, const Policy& policy,
                           const TimeGrid& grid, std::uint64_t seed, std::uint64_t path) {
    params.validate();
    PathBundle b;
    b.grid = grid;
    b.noise = draw_noise(grid, seed, path);
    b.rate = simulate_rate_path(params, init.rate, grid, b.noise);
    b.fee = simulate_fee_rate_path(params, init.fee_rate, b.rate.drift, grid, b.noise.fee_rate);
    b.wealth = simulate_wealth_path(params, init.wealth, policy, b.rate, b.fee, grid, b.noise.rate);
    return b;
}

void write_bundle_csv(std::ostream& os, const PathBundle& b) {
    os << "t,Z,mu,pi,wealth,pl\n";
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << std::setprecision(17);
    for (Eigen::Index i = 0; i < b.rate.rate.size(); ++i) {
        os << b.grid.time(static_cast<std::size_t>(i)) << ',' << b.rate.rate[i] << ',' << b.rate.drift[i] << ','
           << b.fee.fee_rate[i] << ',' << b.wealth.wealth[i] << ',' << b.wealth.pl[i] << '\n';
    }
    os.flags(flags);
    os.precision(prec);
}

MonteCarloStats summarize(const Eigen::Ref<const Eigen::VectorXd>& samples) {
    MonteCarloStats s;
    s.count = static_cast<std::size_t>(samples.size());
    if (s.count == 0) return s;
    s.mean = samples.mean();
    if (s.count > 1) {
        s.std_dev = std::sqrt((samples.array() - s.mean).square().sum() / static_cast<double>(s.count - 1));
        s.std_error = s.std_dev / std::sqrt(static_cast<double>(s.count));
    }
    return s;
}

Eigen::MatrixXd terminal_log_wealth(const ModelParams& params, const InitialState& init,
                                    std::span<const Policy> policies, const TimeGrid& grid, std::size_t paths,
                                    std::uint64_t seed, unsigned workers) {
    params.validate();
    grid.validate();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(paths), static_cast<Eigen::Index>(policies.size()));
    parallel_for(paths, workers, [&](std::size_t p) {
        const auto noise = draw_noise(grid, seed, p);
        const auto rate = simulate_rate_path(params, init.rate, grid, noise);
        const auto fee = simulate_fee_rate_path(params, init.fee_rate, rate.drift, grid, noise.fee_rate);
        for (std::size_t k = 0; k < policies.size(); ++k) {
            const auto w = simulate_wealth_path(params, init.wealth, policies[k], rate, fee, grid, noise.rate);
            out(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k)) = w.log_wealth[w.log_wealth.size() - 1];
        }
    });
    return out;
}

}  // namespace clmm
