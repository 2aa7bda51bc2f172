#include "clmm/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "clmm/errors.hpp"

namespace clmm {

namespace {

// First swap with ts >= t in a time-sorted swap list.
std::size_t first_at_or_after(std::span<const MarketEvent> swaps, std::int64_t t) {
    return static_cast<std::size_t>(
        std::lower_bound(swaps.begin(), swaps.end(), t, [](const MarketEvent& e, std::int64_t v) { return e.ts < v; }) -
        swaps.begin());
}

}  // namespace

RateBars make_bars(std::span<const MarketEvent> swaps, std::int64_t start, std::int64_t step, std::size_t count) {
    if (step <= 0) throw DomainError("bar step must be positive");
    for (const auto& e : swaps)
        if (!e.is_swap()) throw DataError("bars are built from swaps only");
    std::size_t j = first_at_or_after(swaps, start);
    if (j == 0) throw DataError("no swap before the first bar");
    RateBars bars;
    bars.start = start;
    bars.step = step;
    const auto n = static_cast<Eigen::Index>(count + 1);
    bars.rate.resize(n);
    bars.volume = Eigen::VectorXd::Zero(n);
    bars.swaps = Eigen::VectorXi::Zero(n);
    bars.depth.resize(n);
    bars.rate[0] = swaps[j - 1].rate_after;
    bars.depth[0] = swaps[j - 1].pool_depth;
    for (Eigen::Index i = 1; i < n; ++i) {
        const std::int64_t end = bars.time(i);
        double rate = bars.rate[i - 1], depth = bars.depth[i - 1], volume = 0;
        int hits = 0;
        for (; j < swaps.size() && swaps[j].ts < end; ++j) {
            rate = swaps[j].rate_after;
            depth = swaps[j].pool_depth;
            volume += swaps[j].notional();
            ++hits;
        }
        bars.rate[i] = rate;
        bars.depth[i] = depth;
        bars.volume[i] = volume;
        bars.swaps[i] = hits;
    }
    return bars;
}

RateBars make_bars(std::span<const MarketEvent> swaps, std::int64_t step) {
    if (swaps.empty()) throw DataError("no swaps");
    if (step <= 0) throw DomainError("bar step must be positive");
    const std::int64_t first = swaps.front().ts, last = swaps.back().ts;
    const std::int64_t start = (first / step + 1) * step;
    const auto count = static_cast<std::size_t>(std::max<std::int64_t>(0, (last - start) / step + 1));
    return make_bars(swaps, start, step, count);
}

Eigen::VectorXd log_returns(const Eigen::Ref<const Eigen::VectorXd>& series) {
    if (series.size() < 2) throw DataError("need at least two observations");
    if ((series.array() <= 0).any()) throw DomainError("series must be positive");
    Eigen::VectorXd out(series.size() - 1);
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = std::log(series[i + 1] / series[i]);
    return out;
}

// Sums below run left to right in plain loops so results do not depend on
// how Eigen vectorises a reduction.
double estimate_sigma(const Eigen::Ref<const Eigen::VectorXd>& rates, double step_seconds) {
    if (!(step_seconds > 0)) throw DomainError("step must be positive");
    const Eigen::VectorXd r = log_returns(rates);
    const auto n = static_cast<double>(r.size());
    double sum = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) sum += r[i];
    const double mean = sum / n;
    double ss = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) ss += (r[i] - mean) * (r[i] - mean);
    return std::sqrt(ss / n) * std::sqrt(kSecondsPerDay / step_seconds);
}

double estimate_pool_fee_rate(double volume_x, double pool_depth, double rate, double fee_tier, double window_days) {
    if (!(pool_depth > 0)) throw DomainError("pool depth must be positive");
    if (!(rate > 0)) throw DomainError("rate must be positive");
    if (!(window_days > 0)) throw DomainError("window must be positive");
    if (!(volume_x >= 0)) throw DomainError("volume must be nonnegative");
    return fee_tier * volume_x / (2.0 * pool_depth * std::sqrt(rate)) / window_days;
}

FeeRateEstimate estimate_pool_fee_rate(std::span<const MarketEvent> swaps, double pool_depth, double rate,
                                       double fee_tier, double window_days) {
    FeeRateEstimate out;
    for (const auto& e : swaps) {
        if (!e.is_swap()) continue;
        out.volume += e.notional();
        out.empty = false;
    }
    out.fee_rate = estimate_pool_fee_rate(out.volume, pool_depth, rate, fee_tier, window_days);
    return out;
}

double estimate_drift(const Eigen::Ref<const Eigen::VectorXd>& rates, const Eigen::Ref<const Eigen::VectorXd>& times) {
    if (rates.size() != times.size()) throw ShapeError("rates and times differ in length");
    const Eigen::VectorXd r = log_returns(rates);
    const auto n = static_cast<double>(r.size());
    double sum = 0.0, span = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        sum += r[i];
        span += times[i + 1] - times[i];
    }
    const double mean_dt = span / n / kSecondsPerDay;
    if (!(mean_dt > 0)) throw DataError("observation times must increase");
    return sum / n / mean_dt;
}

double RateSeries::at(std::int64_t t) const {
    auto it = std::upper_bound(time.begin(), time.end(), t);
    if (it == time.begin()) throw DataError("no reference rate at or before t=" + std::to_string(t));
    return rate[static_cast<std::size_t>(it - time.begin()) - 1];
}

double realized_fee_revenue(std::span<const MarketEvent> swaps, const RateSeries& reference, double spread,
                            const FeeRevenueOptions& opt) {
    if (!(spread > 0) || !(spread < 4)) throw DomainError("spread must lie in (0, 4)");
    if (opt.window <= 0) throw DomainError("window must be positive");
    if (swaps.empty()) return 0.0;
    std::size_t windows = opt.windows;
    if (windows == 0) {
        const std::int64_t covered = swaps.back().ts + 1 - opt.start;
        windows = covered > 0 ? static_cast<std::size_t>(covered / opt.window) : 0;
    }
    if (windows == 0) return 0.0;
    double total = 0.0;
    std::size_t j = first_at_or_after(swaps, opt.start);
    for (std::size_t k = 0; k < windows; ++k) {
        const std::int64_t begin = opt.start + static_cast<std::int64_t>(k) * opt.window;
        const std::int64_t end = begin + opt.window;
        const double z0 = reference.at(begin);
        const auto range = range_from_spread(z0, spread / 2, spread / 2);
        const double depth = depth_from_wealth(1.0, z0, spread / 2, spread / 2);
        for (; j < swaps.size() && swaps[j].ts < end; ++j) {
            const auto& e = swaps[j];
            if (!e.is_swap()) continue;
            total += fee_share(depth, e.pool_depth, e.fee_x, fee_free_rate(e, opt.fee_tier), range);
        }
    }
    return total / static_cast<double>(windows);
}

GammaEstimate estimate_gamma(const Eigen::Ref<const Eigen::VectorXd>& spreads,
                             const Eigen::Ref<const Eigen::VectorXd>& revenue, double horizon_days) {
    if (spreads.size() != revenue.size()) throw ShapeError("spread grid and revenue differ in length");
    if (spreads.size() < 3) throw DataError("need at least three spreads");
    if (!(horizon_days > 0)) throw DomainError("horizon must be positive");
    const Eigen::Index n = spreads.size();
    Eigen::MatrixXd design(n, 2);
    design.col(0).setOnes();
    design.col(1) = spreads;
    const Eigen::VectorXd y = spreads.array().square() * revenue.array();
    const auto qr = design.colPivHouseholderQr();
    if (qr.rank() < 2) throw DataError("degenerate design: spreads do not vary");
    const Eigen::Vector2d beta = qr.solve(y);
    GammaEstimate out;
    out.intercept = beta[0];
    out.slope = beta[1];
    out.gamma = -beta[0] / horizon_days;
    out.fee_rate = beta[1] / (4.0 * horizon_days);
    const Eigen::VectorXd resid = y - design * beta;
    const double ss_tot = (y.array() - y.mean()).square().sum();
    out.r_squared = ss_tot > 0 ? 1.0 - resid.squaredNorm() / ss_tot : 1.0;
    return out;
}

Eigen::VectorXd default_spread_grid(std::size_t n) {
    if (n < 2) throw DomainError("grid needs at least two points");
    return Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(n), 0.0005, 0.05);
}

double correlation(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
    if (a.size() != b.size()) throw ShapeError("samples differ in length");
    if (a.size() < 2) throw DataError("need at least two observations");
    const Eigen::ArrayXd da = a.array() - a.mean(), db = b.array() - b.mean();
    const double denom = std::sqrt(da.square().sum() * db.square().sum());
    if (!(denom > 0)) return std::numeric_limits<double>::quiet_NaN();
    return (da * db).sum() / denom;
}

}  // namespace clmm
