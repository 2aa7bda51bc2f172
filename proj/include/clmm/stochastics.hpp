#ifndef CLMM_STOCHASTICS_HPP
#define CLMM_STOCHASTICS_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <vector>

#include "clmm/core.hpp"

namespace clmm {

/// Uniform time grid in days. One minute is 1/1440.
struct TimeGrid {
    double dt{1.0 / 1440.0};
    std::size_t steps{1440};

    double horizon() const { return dt * static_cast<double>(steps); }
    double time(std::size_t i) const { return dt * static_cast<double>(i); }
    void validate() const;
};

/// A drift process for the marginal rate, advanced one step at a time from
/// its own noise stream.
class DriftProcess {
public:
    virtual ~DriftProcess() = default;
    virtual double initial() const = 0;
    virtual double step(double drift, double dt, double normal) const = 0;
    virtual bool is_constant() const { return false; }
};

class ConstantDrift final : public DriftProcess {
public:
    explicit ConstantDrift(double drift = 0.0) : drift_(drift) {}
    double initial() const override { return drift_; }
    double step(double, double, double) const override { return drift_; }
    bool is_constant() const override { return true; }

private:
    double drift_;
};

/// d mu = speed (level - mu) dt + vol dB', sampled with the exact Gaussian
/// transition.
class OrnsteinUhlenbeckDrift final : public DriftProcess {
public:
    OrnsteinUhlenbeckDrift(double initial, double speed, double level, double vol);
    double initial() const override { return initial_; }
    double step(double drift, double dt, double normal) const override;
    double speed() const { return speed_; }
    double level() const { return level_; }
    double vol() const { return vol_; }

private:
    double initial_, speed_, level_, vol_;
};

struct ModelParams {
    double sigma{0.02};
    std::shared_ptr<const DriftProcess> drift{std::make_shared<ConstantDrift>(0.0)};
    double fee_speed{2.0};   // Gamma
    double fee_mean{0.002};  // pi bar, long-run mean of pi - eta
    double fee_vol{0.01};    // psi
    double epsilon{1e-4};
    double gamma{5e-7};
    double zeta{0.0};
    double gas{0.0};

    void validate() const;
};

struct InitialState {
    double rate{100.0};
    double fee_rate{0.02};
    double wealth{1.0};
};

struct RatePath {
    Eigen::VectorXd rate;
    Eigen::VectorXd drift;
};

struct FeeRatePath {
    Eigen::VectorXd fee_rate;  // pi
    Eigen::VectorXd excess;    // pi - eta, kept nonnegative
    std::size_t truncated_steps{0};
};

struct WealthPath {
    Eigen::VectorXd log_wealth;
    Eigen::VectorXd wealth;
    Eigen::VectorXd pl;
    Eigen::VectorXd delta_lower;
    Eigen::VectorXd delta_upper;
};

/// Independent standard normal streams for one path: W drives the rate and
/// the wealth diffusion, B drives the fee rate, the third feeds the drift.
struct NoiseStreams {
    Eigen::VectorXd rate;
    Eigen::VectorXd fee_rate;
    Eigen::VectorXd drift;
};

NoiseStreams draw_noise(const TimeGrid& grid, std::uint64_t seed, std::uint64_t path);

/// Policy callback: (t, Z, mu, pi) -> legs.
using Policy = std::function<SpreadLegs<double>(double t, double rate, double drift, double fee_rate)>;

/// Closed-form optimal legs evaluated on the current state.
Policy optimal_policy(const ModelParams& params);

/// Fixed spread with asymmetry rho(delta, mu) unless `asymmetry_shift` moves it.
Policy fixed_spread_policy(double spread, double asymmetry_shift = 0.0, double zeta = 0.0);

RatePath simulate_rate_path(const ModelParams& params, double initial_rate, const TimeGrid& grid,
                            const NoiseStreams& noise);
RatePath simulate_rate_path(const ModelParams& params, double initial_rate, const TimeGrid& grid,
                            std::uint64_t seed, std::uint64_t path = 0);

FeeRatePath simulate_fee_rate_path(const ModelParams& params, double initial_fee_rate,
                                   const Eigen::Ref<const Eigen::VectorXd>& drift, const TimeGrid& grid,
                                   const Eigen::Ref<const Eigen::VectorXd>& noise);
FeeRatePath simulate_fee_rate_path(const ModelParams& params, double initial_fee_rate,
                                   const Eigen::Ref<const Eigen::VectorXd>& drift, const TimeGrid& grid,
                                   std::uint64_t seed, std::uint64_t path = 0);

WealthPath simulate_wealth_path(const ModelParams& params, double initial_wealth, const Policy& policy,
                                const RatePath& rate, const FeeRatePath& fee, const TimeGrid& grid,
                                const Eigen::Ref<const Eigen::VectorXd>& rate_noise);

/// PL_t = -(sigma^2/2) sum_{s<t} wealth_s / delta_s dt, PL_0 = 0.
Eigen::VectorXd pl_accrual(const Eigen::Ref<const Eigen::VectorXd>& wealth,
                           const Eigen::Ref<const Eigen::VectorXd>& spread, double sigma, const TimeGrid& grid);

struct PathBundle {
    TimeGrid grid;
    RatePath rate;
    FeeRatePath fee;
    WealthPath wealth;
    NoiseStreams noise;
};

PathBundle simulate_bundle(const ModelParams& params, const InitialState& init, const Policy& policy,
                           const TimeGrid& grid, std::uint64_t seed, std::uint64_t path = 0);

/// One row per step: t,Z,mu,pi,wealth,pl
void write_bundle_csv(std::ostream& os, const PathBundle& bundle);

struct MonteCarloStats {
    double mean{0};
    double std_error{0};
    double std_dev{0};
    std::size_t count{0};
};

MonteCarloStats summarize(const Eigen::Ref<const Eigen::VectorXd>& samples);

/// Terminal log-wealth for each policy on common random numbers:
/// row = path, column = policy. Deterministic for any worker count.
Eigen::MatrixXd terminal_log_wealth(const ModelParams& params, const InitialState& init,
                                    std::span<const Policy> policies, const TimeGrid& grid, std::size_t paths,
                                    std::uint64_t seed, unsigned workers = 0);

}  // namespace clmm

#endif  // CLMM_STOCHASTICS_HPP
