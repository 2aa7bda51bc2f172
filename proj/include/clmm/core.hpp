#ifndef CLMM_CORE_HPP
#define CLMM_CORE_HPP

// Constant-product algebra with concentrated liquidity. Everything here is a
// pure function templated on the scalar type; double is the only type the
// rest of the library instantiates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "clmm/errors.hpp"

namespace clmm {

enum class Side { Buy, Sell };

/// The venue: marginal rate Z (X per Y), active depth kappa, proportional
/// fee tier tau and the tick grid. Reserves are implied by (Z, kappa).
template <typename Scalar>
struct PoolState {
    Scalar rate{1};
    Scalar depth{1};
    Scalar fee_tier{0};
    std::vector<Scalar> ticks;

    void validate() const {
        if (!(rate > 0)) throw DomainError("pool rate must be positive");
        if (!(depth > 0)) throw DomainError("pool depth must be positive");
        if (!(fee_tier >= 0 && fee_tier < 1)) throw DomainError("fee tier must lie in [0, 1)");
        for (std::size_t i = 1; i < ticks.size(); ++i)
            if (!(ticks[i] > ticks[i - 1])) throw DomainError("tick grid must be strictly increasing");
    }

    Scalar reserve_x() const { return depth * std::sqrt(rate); }
    Scalar reserve_y() const { return depth / std::sqrt(rate); }
};

template <typename Scalar>
struct RateRange {
    Scalar lower{0};
    Scalar upper{0};

    bool contains(Scalar z) const { return lower < z && z <= upper; }
};

template <typename Scalar>
struct SpreadLegs {
    Scalar lower{0};
    Scalar upper{0};

    Scalar spread() const { return lower + upper; }
};

template <typename Scalar>
struct Holdings {
    Scalar x{0};
    Scalar y{0};
};

/// An LP range with its spread legs, depth, holdings and fees accrued in X.
template <typename Scalar>
struct LiquidityPosition {
    RateRange<Scalar> range;
    SpreadLegs<Scalar> legs;
    Scalar depth{0};
    Holdings<Scalar> holdings;
    Scalar fees{0};
};

template <typename Scalar>
Scalar level_function(Scalar reserve_y, Scalar depth) {
    if (!(reserve_y > 0) || !(depth > 0)) throw DomainError("level function needs positive reserve and depth");
    return depth * depth / reserve_y;
}

/// Execution rate in X per Y for a trade of size y against a single tick
/// range. Zero size returns the infinitesimal-trade limit.
template <typename Scalar>
Scalar execution_rate(const PoolState<Scalar>& pool, Side side, Scalar y) {
    if (!(y >= 0)) throw DomainError("trade size must be nonnegative");
    const Scalar tau = pool.fee_tier;
    const Scalar qy = pool.reserve_y();
    if (side == Side::Buy) {
        if (y == 0) return pool.rate / (1 - tau);
        if (!(y < qy)) throw LiquidityExhausted("buy size exhausts the Y reserve");
        // [phi(q - y) - phi(q)] / ((1 - tau) y) with the difference cancelled analytically
        return pool.depth * pool.depth / (qy * (qy - y) * (1 - tau));
    }
    if (y == 0) return (1 - tau) * pool.rate;
    // [phi(q) - phi(q + (1 - tau) y)] / y
    return pool.depth * pool.depth * (1 - tau) / (qy * (qy + (1 - tau) * y));
}

template <typename Scalar>
bool legs_in_domain(Scalar delta_lower, Scalar delta_upper) {
    return delta_lower > 0 && delta_lower <= 2 && delta_upper >= 0 && delta_upper < 2 &&
           delta_lower * delta_upper / 2 < delta_lower + delta_upper;
}

/// Range boundaries from spread legs, parametrised in sqrt(Z):
/// sqrt(Zu) = sqrt(Z) / (1 - du/2), sqrt(Zl) = sqrt(Z) (1 - dl/2).
template <typename Scalar>
RateRange<Scalar> range_from_spread(Scalar rate, Scalar delta_lower, Scalar delta_upper) {
    if (!(rate > 0)) throw DomainError("rate must be positive");
    if (!legs_in_domain(delta_lower, delta_upper)) throw DomainError("spread legs outside (0,2] x [0,2)");
    const Scalar root = std::sqrt(rate);
    const Scalar root_upper = root / (1 - delta_upper / 2);
    const Scalar root_lower = root * (1 - delta_lower / 2);
    return {root_lower * root_lower, root_upper * root_upper};
}

/// Inverse of range_from_spread. Defined for any positive rate; legs come
/// out negative when the rate sits outside the range.
template <typename Scalar>
SpreadLegs<Scalar> spread_from_range(Scalar rate, const RateRange<Scalar>& range) {
    if (!(rate > 0)) throw DomainError("rate must be positive");
    if (!(range.lower >= 0 && range.lower < range.upper)) throw DomainError("invalid range");
    const Scalar lower = 2 * (1 - std::sqrt(range.lower / rate));
    const Scalar upper = std::isinf(range.upper) ? Scalar(2) : 2 * (1 - std::sqrt(rate / range.upper));
    return {lower, upper};
}

/// Snap both bounds to their nearest ticks. If they land on the same tick the
/// range is widened to the one-tick range holding the original midpoint.
template <typename Scalar>
RateRange<Scalar> round_to_ticks(const RateRange<Scalar>& range, std::span<const Scalar> grid) {
    if (grid.empty()) throw DomainError("tick grid is empty");
    if (!(range.lower < range.upper)) throw DomainError("invalid range");
    if (grid.size() == 1) return {grid.front(), grid.front()};
    auto nearest = [&](Scalar z, bool prefer_lower) -> std::size_t {
        auto it = std::lower_bound(grid.begin(), grid.end(), z);
        if (it == grid.begin()) return 0;
        if (it == grid.end()) return grid.size() - 1;
        const auto hi = static_cast<std::size_t>(it - grid.begin());
        const auto lo = hi - 1;
        const Scalar dlo = z - grid[lo];
        const Scalar dhi = grid[hi] - z;
        if (dlo < dhi) return lo;
        if (dhi < dlo) return hi;
        return prefer_lower ? lo : hi;
    };
    const std::size_t lo = nearest(range.lower, true);
    const std::size_t hi = nearest(range.upper, false);
    if (lo != hi) return {grid[lo], grid[hi]};
    const Scalar mid = (range.lower + range.upper) / 2;
    if ((mid > grid[lo] && lo + 1 < grid.size()) || lo == 0) return {grid[lo], grid[lo + 1]};
    return {grid[lo - 1], grid[lo]};
}

template <typename Scalar>
RateRange<Scalar> round_to_ticks(const RateRange<Scalar>& range, const std::vector<Scalar>& grid) {
    return round_to_ticks(range, std::span<const Scalar>(grid.data(), grid.size()));
}

/// Holdings of a position with depth kappa_tilde on (Zl, Zu] at rate Z.
template <typename Scalar>
Holdings<Scalar> holdings_for_position(Scalar rate, const RateRange<Scalar>& range, Scalar position_depth) {
    if (!(range.lower >= 0 && range.lower < range.upper)) throw DomainError("invalid range");
    if (!(position_depth >= 0)) throw DomainError("position depth must be nonnegative");
    if (!(rate > 0)) throw DomainError("rate must be positive");
    const Scalar inv_root_upper = std::isinf(range.upper) ? Scalar(0) : 1 / std::sqrt(range.upper);
    const Scalar root_lower = std::sqrt(range.lower);
    if (rate <= range.lower)
        return {Scalar(0), position_depth * (1 / root_lower - inv_root_upper)};
    if (rate <= range.upper)
        return {position_depth * (std::sqrt(rate) - root_lower), position_depth * (1 / std::sqrt(rate) - inv_root_upper)};
    return {position_depth * (std::sqrt(range.upper) - root_lower), Scalar(0)};
}

/// Depth bought by wealth x_tilde on the range built from (dl, du) at Z.
template <typename Scalar>
Scalar depth_from_wealth(Scalar wealth, Scalar rate, Scalar delta_lower, Scalar delta_upper) {
    if (!(wealth > 0)) throw DomainError("wealth must be positive");
    if (!(rate > 0)) throw DomainError("rate must be positive");
    const Scalar spread = delta_lower + delta_upper;
    if (!(spread > 0)) throw DomainError("spread must be positive");
    return 2 * wealth / (std::sqrt(rate) * spread);
}

/// Depth for wealth on an arbitrary range (e.g. after tick rounding).
template <typename Scalar>
Scalar depth_for_range(Scalar wealth, Scalar rate, const RateRange<Scalar>& range) {
    const auto unit = holdings_for_position(rate, range, Scalar(1));
    const Scalar unit_value = unit.x + unit.y * rate;
    if (!(unit_value > 0)) throw DomainError("range carries no value at this rate");
    return wealth / unit_value;
}

/// Share of an LT fee p earned by a position of depth kappa_tilde.
template <typename Scalar>
Scalar fee_share(Scalar position_depth, Scalar pool_depth, Scalar fee, Scalar rate, const RateRange<Scalar>& range) {
    if (!(pool_depth > 0)) throw DomainError("pool depth must be positive");
    if (!(position_depth >= 0) || !(fee >= 0)) throw DomainError("depth and fee must be nonnegative");
    return range.contains(rate) ? position_depth / pool_depth * fee : Scalar(0);
}

template <typename Scalar>
Scalar position_value(Scalar x, Scalar y, Scalar rate) {
    return x + y * rate;
}

template <typename Scalar>
Scalar position_value(const Holdings<Scalar>& h, Scalar rate) {
    return h.x + h.y * rate;
}

/// Build a fully specified position from wealth and legs at rate Z.
template <typename Scalar>
LiquidityPosition<Scalar> open_position(Scalar wealth, Scalar rate, Scalar delta_lower, Scalar delta_upper) {
    LiquidityPosition<Scalar> p;
    p.range = range_from_spread(rate, delta_lower, delta_upper);
    p.legs = {delta_lower, delta_upper};
    p.depth = depth_from_wealth(wealth, rate, delta_lower, delta_upper);
    p.holdings = holdings_for_position(rate, p.range, p.depth);
    return p;
}

/// One leg of a swap that stays inside a single tick range.
template <typename Scalar>
struct SwapSegment {
    Scalar amount_y{0};
    Scalar exec_rate{0};
    Scalar fee_x{0};
    Scalar depth{0};
    Scalar rate_before{0};
    Scalar rate_after{0};
};

/// A pool whose depth is piecewise constant on tick ranges. Swaps that cross
/// a tick are split into per-range segments, each priced with that range's
/// depth.
template <typename Scalar>
class TickedPool {
public:
    TickedPool(std::vector<Scalar> ticks, std::vector<Scalar> range_depths, Scalar rate, Scalar fee_tier)
        : ticks_(std::move(ticks)), depths_(std::move(range_depths)), rate_(rate), fee_tier_(fee_tier) {
        if (ticks_.size() < 2 || depths_.size() + 1 != ticks_.size())
            throw DomainError("need one depth per tick range");
        for (std::size_t i = 1; i < ticks_.size(); ++i)
            if (!(ticks_[i] > ticks_[i - 1])) throw DomainError("tick grid must be strictly increasing");
        for (auto d : depths_)
            if (!(d > 0)) throw DomainError("range depths must be positive");
        if (!(rate_ > ticks_.front() && rate_ <= ticks_.back())) throw DomainError("rate outside tick grid");
        if (!(fee_tier_ >= 0 && fee_tier_ < 1)) throw DomainError("fee tier must lie in [0, 1)");
        auto it = std::lower_bound(ticks_.begin(), ticks_.end(), rate_);
        range_ = static_cast<std::size_t>(it - ticks_.begin()) - 1;
    }

    Scalar rate() const { return rate_; }
    Scalar fee_tier() const { return fee_tier_; }
    const std::vector<Scalar>& ticks() const { return ticks_; }

    /// Index i of the active range (ticks[i], ticks[i+1]].
    std::size_t active_range() const { return range_; }

    Scalar active_depth() const { return depths_[active_range()]; }

    /// Trade y units of Y. Buying Y raises the rate, selling lowers it.
    std::vector<SwapSegment<Scalar>> swap(Side side, Scalar y) {
        if (!(y >= 0)) throw DomainError("trade size must be nonnegative");
        std::vector<SwapSegment<Scalar>> out;
        Scalar remaining = y;
        while (remaining > 0) {
            const std::size_t i = active_range();
            const Scalar k = depths_[i];
            const Scalar root = std::sqrt(rate_);
            SwapSegment<Scalar> seg;
            seg.depth = k;
            seg.rate_before = rate_;
            if (side == Side::Buy) {
                // y leaving the pool until the upper tick: k (1/sqrt(Z) - 1/sqrt(Zu))
                const Scalar cap = k * (1 / root - 1 / std::sqrt(ticks_[i + 1]));
                const bool crosses = remaining >= cap;
                if (crosses && i + 2 >= ticks_.size()) throw LiquidityExhausted("buy exhausts the tick grid");
                const Scalar dy = crosses ? cap : remaining;
                const Scalar new_inv_root = 1 / root - dy / k;
                const Scalar new_rate = crosses ? ticks_[i + 1] : 1 / (new_inv_root * new_inv_root);
                // X paid into the pool net of fee moves sqrt(Z) by dx / k
                const Scalar dx_net = k * (std::sqrt(new_rate) - root);
                const Scalar dx_gross = dx_net / (1 - fee_tier_);
                seg.amount_y = dy;
                seg.exec_rate = dy > 0 ? dx_gross / dy : rate_ / (1 - fee_tier_);
                seg.fee_x = dx_gross - dx_net;
                rate_ = new_rate;
                if (crosses) range_ = i + 1;
                seg.rate_after = rate_;
                remaining -= dy;
            } else {
                // net Y entering the pool until the lower tick: k (1/sqrt(Zl) - 1/sqrt(Z))
                const Scalar cap_net = k * (1 / std::sqrt(ticks_[i]) - 1 / root);
                const Scalar net = (1 - fee_tier_) * remaining;
                const bool crosses = net >= cap_net;
                if (crosses && i == 0) throw LiquidityExhausted("sell exhausts the tick grid");
                const Scalar dy_net = crosses ? cap_net : net;
                const Scalar dy = dy_net / (1 - fee_tier_);
                const Scalar new_inv_root = 1 / root + dy_net / k;
                const Scalar new_rate = crosses ? ticks_[i] : 1 / (new_inv_root * new_inv_root);
                const Scalar dx_out = k * (root - std::sqrt(new_rate));
                seg.amount_y = dy;
                seg.exec_rate = dy > 0 ? dx_out / dy : (1 - fee_tier_) * rate_;
                // fee withheld in Y, expressed in X at the execution rate
                seg.fee_x = (dy - dy_net) * seg.exec_rate;
                rate_ = new_rate;
                if (crosses) range_ = i - 1;
                seg.rate_after = rate_;
                remaining = crosses ? std::max(remaining - dy, Scalar(0)) : Scalar(0);
            }
            out.push_back(seg);
            if (out.size() > ticks_.size() + 2) throw NumericError("swap failed to terminate");
        }
        return out;
    }

private:
    std::vector<Scalar> ticks_;
    std::vector<Scalar> depths_;
    Scalar rate_;
    Scalar fee_tier_;
    std::size_t range_{0};
};

}  // namespace clmm

#endif  // CLMM_CORE_HPP
