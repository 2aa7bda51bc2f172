#ifndef CLMM_ESTIMATION_HPP
#define CLMM_ESTIMATION_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "clmm/events.hpp"

namespace clmm {

inline constexpr double kSecondsPerDay = 86400.0;

/// Rate and LT volume sampled on a regular grid b_i = start + i * step.
/// rate[i] is the post-trade rate of the last swap strictly before b_i
/// (forward filled), volume[i] the X notional of swaps in [b_{i-1}, b_i)
/// (zero filled). A swap stamped exactly b_i therefore lands after the
/// sample at b_i. Entry 0 carries no volume.
struct RateBars {
    std::int64_t start{0};
    std::int64_t step{60};
    Eigen::VectorXd rate;
    Eigen::VectorXd volume;
    Eigen::VectorXd depth;  // pool depth of the same swap as rate
    Eigen::VectorXi swaps;

    std::int64_t time(Eigen::Index i) const { return start + step * static_cast<std::int64_t>(i); }
};

/// count + 1 bars from `start`, from time-sorted swaps. Needs a swap
/// strictly before start.
RateBars make_bars(std::span<const MarketEvent> swaps, std::int64_t start, std::int64_t step, std::size_t count);

/// Bars covering the whole log from the first multiple of `step` after the
/// first swap.
RateBars make_bars(std::span<const MarketEvent> swaps, std::int64_t step = 60);

/// Population standard deviation of log returns, scaled to a daily figure by
/// sqrt(86400 / step_seconds).
double estimate_sigma(const Eigen::Ref<const Eigen::VectorXd>& rates, double step_seconds);

/// pi = tau V / (2 kappa sqrt(Z)), per day; `window_days` rescales a volume
/// measured over a window of another length.
double estimate_pool_fee_rate(double volume_x, double pool_depth, double rate, double fee_tier,
                              double window_days = 1.0);

struct FeeRateEstimate {
    double fee_rate{0};
    double volume{0};
    bool empty{true};  // no swaps in the window: the estimate is zero
};

/// Same estimate from the swaps in a window of `window_days`.
FeeRateEstimate estimate_pool_fee_rate(std::span<const MarketEvent> swaps, double pool_depth, double rate,
                                       double fee_tier, double window_days = 1.0);

/// Mean log return over the mean observed interval, per day. `times` are in
/// seconds.
double estimate_drift(const Eigen::Ref<const Eigen::VectorXd>& rates, const Eigen::Ref<const Eigen::VectorXd>& times);

/// Reference rate for recentering the hypothetical position: a step
/// function given by (time, rate) points.
struct RateSeries {
    std::vector<std::int64_t> time;
    std::vector<double> rate;

    /// Rate of the last point at or before t. Throws DataError if none.
    double at(std::int64_t t) const;
};

struct FeeRevenueOptions {
    std::int64_t start{0};
    std::int64_t window{3600};  // m, seconds
    std::size_t windows{0};     // 0: as many full windows as the swaps cover
    double fee_tier{0.0005};
};

/// Average fee income of a symmetric position of unit wealth with spread
/// delta, recentred at the start of each window [start + k m, start + (k+1) m).
double realized_fee_revenue(std::span<const MarketEvent> swaps, const RateSeries& reference, double spread,
                            const FeeRevenueOptions& opt);

struct GammaEstimate {
    double gamma{0};
    double fee_rate{0};  // slope / (4 m), a cross-check on pi
    double intercept{0};
    double slope{0};
    double r_squared{0};
};

/// OLS of delta^2 p_hat on delta: delta^2 p_hat = 4 pi m delta - gamma m.
GammaEstimate estimate_gamma(const Eigen::Ref<const Eigen::VectorXd>& spreads,
                             const Eigen::Ref<const Eigen::VectorXd>& revenue, double horizon_days);

/// Default spread grid for the regression: n points evenly spaced on
/// [0.0005, 0.05].
Eigen::VectorXd default_spread_grid(std::size_t n = 100);

/// Pearson correlation of two equally long samples; NaN if either is flat.
double correlation(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

/// Log returns of a positive series.
Eigen::VectorXd log_returns(const Eigen::Ref<const Eigen::VectorXd>& series);

}  // namespace clmm

#endif  // CLMM_ESTIMATION_HPP
