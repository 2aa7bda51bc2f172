#include "clmm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "clmm/core.hpp"
#include "clmm/errors.hpp"
#include "clmm/random.hpp"

namespace clmm {

namespace {

struct Pending {
    std::int64_t ts;
    MarketEvent burn;
};

// Y a buy (or gross Y a sell) must trade to carry the pool from `from` to
// `to` across ranges of the given depths.
double amount_to_reach(const std::vector<double>& ticks, const std::vector<double>& depths, double from, double to,
                       double fee_tier) {
    double amount = 0.0;
    auto it = std::lower_bound(ticks.begin(), ticks.end(), from);
    auto i = static_cast<std::size_t>(it - ticks.begin()) - 1;
    double z = from;
    if (to > from) {
        while (true) {
            const double stop = std::min(to, ticks[i + 1]);
            amount += depths[i] * (1 / std::sqrt(z) - 1 / std::sqrt(stop));
            if (stop == to || i + 2 >= ticks.size()) break;
            z = stop;
            ++i;
        }
    } else {
        while (true) {
            const double stop = std::max(to, ticks[i]);
            amount += depths[i] * (1 / std::sqrt(stop) - 1 / std::sqrt(z)) / (1 - fee_tier);
            if (stop == to || i == 0) break;
            z = stop;
            --i;
        }
    }
    return amount;
}

std::size_t poisson(NormalStream& rng, double lambda) {
    const double limit = std::exp(-lambda);
    std::size_t k = 0;
    double p = rng.uniform();
    while (p > limit) {
        ++k;
        p *= rng.uniform();
    }
    return k;
}

}  // namespace

void SyntheticLogConfig::validate() const {
    if (events == 0) throw DomainError("event count must be positive");
    if (!(rate > 0) || !(depth > 0)) throw DomainError("rate and depth must be positive");
    if (!(depth_wobble >= 0 && depth_wobble < 1)) throw DomainError("depth wobble must lie in [0, 1)");
    if (!(fee_tier >= 0 && fee_tier < 1)) throw DomainError("fee tier must lie in [0, 1)");
    if (tick_spacing <= 0 || grid_ranges <= 0) throw DomainError("tick grid must be nonempty");
    if (!(sigma >= 0)) throw DomainError("sigma must be nonnegative");
    if (!(noise_per_minute >= 0) || !(noise_size > 0)) throw DomainError("noise settings must be positive");
    if (!(mint_per_minute >= 0 && mint_per_minute <= 1)) throw DomainError("mint probability must lie in [0, 1]");
    if (!(mean_hold_minutes > 0)) throw DomainError("hold time must be positive");
    if (wallets == 0) throw DomainError("need at least one wallet");
    if (!(unmatched_fraction >= 0 && unmatched_fraction <= 1)) throw DomainError("unmatched fraction must lie in [0, 1]");
}

std::vector<MarketEvent> generate_synthetic_log(const SyntheticLogConfig& config) {
    config.validate();
    NormalStream rng(config.seed, Stream::Events, 0);
    const auto centre =
        static_cast<std::int64_t>(std::floor(std::log(config.rate) / std::log(1.0001) / static_cast<double>(config.tick_spacing)));
    std::vector<double> ticks, depths;
    for (std::int64_t k = centre - config.grid_ranges; k <= centre + config.grid_ranges + 1; ++k)
        ticks.push_back(tick_to_rate(k * config.tick_spacing));
    for (std::size_t k = 0; k + 1 < ticks.size(); ++k)
        depths.push_back(config.depth * (1 + config.depth_wobble * std::sin(static_cast<double>(k))));
    TickedPool<double> pool(ticks, depths, config.rate, config.fee_tier);

    const double dt = 1.0 / 1440.0;
    double latent = std::log(config.rate);
    std::vector<MarketEvent> out;
    std::vector<Pending> pending;

    auto emit = [&](std::int64_t ts, Side side, double y) {
        if (!(y > 0)) return;
        for (const auto& s : pool.swap(side, y)) {
            if (!(s.amount_y > 0)) continue;
            MarketEvent e;
            e.ts = ts;
            e.side = side;
            e.amount_y = s.amount_y;
            e.exec_rate = s.exec_rate;
            e.fee_x = config.fee_tier * s.amount_y * s.exec_rate;
            e.pool_depth = s.depth;
            e.rate_after = s.rate_after;
            out.push_back(e);
        }
    };

    for (std::int64_t minute = 0; out.size() < config.events; ++minute) {
        const std::int64_t base = config.start + 60 * minute;
        // burns that fall due in this minute, at second 40
        for (auto it = pending.begin(); it != pending.end();) {
            if (it->ts <= base + 40) {
                MarketEvent b = it->burn;
                b.ts = base + 40;
                out.push_back(b);
                it = pending.erase(it);
            } else {
                ++it;
            }
        }
        const std::size_t trades = poisson(rng, config.noise_per_minute);
        std::vector<std::int64_t> seconds(trades);
        for (auto& s : seconds) s = static_cast<std::int64_t>(rng.uniform() * 50.0);
        std::sort(seconds.begin(), seconds.end());
        for (std::int64_t s : seconds) {
            const Side side = rng.uniform() < 0.5 ? Side::Buy : Side::Sell;
            emit(base + s, side, -config.noise_size * std::log(1.0 - rng.uniform()));
        }
        if (rng.uniform() < config.mint_per_minute) {
            const auto wallet = static_cast<std::size_t>(rng.uniform() * static_cast<double>(config.wallets));
            const auto below = 1 + static_cast<std::int64_t>(rng.uniform() * 60.0);
            const auto above = 1 + static_cast<std::int64_t>(rng.uniform() * 60.0);
            const auto here = static_cast<std::int64_t>(
                std::floor(std::log(pool.rate()) / std::log(1.0001) / static_cast<double>(config.tick_spacing)));
            MarketEvent m;
            m.ts = base + 45;
            m.kind = EventKind::Mint;
            m.wallet = "0xlp" + std::to_string(wallet);
            m.tick_lower = (here - below) * config.tick_spacing;
            m.tick_upper = (here + above) * config.tick_spacing;
            // round depths so that equal-depth mints by one wallet do occur
            m.position_depth = std::round(1 + rng.uniform() * 20.0) * 1000.0;
            out.push_back(m);
            if (rng.uniform() >= config.unmatched_fraction) {
                MarketEvent b = m;
                b.kind = EventKind::Burn;
                const double hold = -config.mean_hold_minutes * std::log(1.0 - rng.uniform());
                pending.push_back({base + 60 * (1 + static_cast<std::int64_t>(hold)), b});
            }
        }
        latent += (config.drift - config.sigma * config.sigma / 2) * dt + config.sigma * std::sqrt(dt) * rng();
        const double target = std::exp(latent);
        const double now = pool.rate();
        if (target > now) emit(base + 55, Side::Buy, amount_to_reach(ticks, depths, now, target, config.fee_tier));
        else if (target < now)
            emit(base + 55, Side::Sell, amount_to_reach(ticks, depths, now, target, config.fee_tier));
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.ts < b.ts; });
    out.resize(config.events);
    return out;
}

GammaDesign generate_gamma_design(const GammaDesignConfig& c) {
    if (!(c.fee_rate > 0) || !(c.gamma >= 0)) throw DomainError("fee rate must be positive and gamma nonnegative");
    if (!(c.rate > 0) || !(c.depth > 0)) throw DomainError("rate and depth must be positive");
    if (!(c.fee_tier > 0 && c.fee_tier < 1)) throw DomainError("fee tier must lie in (0, 1)");
    if (c.window <= 0 || c.windows == 0 || c.swaps_per_window == 0) throw DomainError("design needs windows and swaps");
    GammaDesign d;
    d.horizon_days = static_cast<double>(c.window) / kSecondsPerDay;
    d.reference = {{c.start}, {c.rate}};
    d.options.start = c.start;
    d.options.window = c.window;
    d.options.windows = c.windows;
    d.options.fee_tier = c.fee_tier;
    const double pool_fees = 2.0 * c.depth * std::sqrt(c.rate) * c.fee_rate * d.horizon_days;
    const double s_min = c.gamma / (8.0 * c.fee_rate);

    // offset v above (sign +1) or below Z, carrying `fee` of the window total
    auto make_swap = [&](std::int64_t ts, double v, int sign, double fee) {
        const double f = 1 - v / 2;
        const double target = sign > 0 ? c.rate / (f * f) : c.rate * f * f;
        MarketEvent e;
        e.ts = ts;
        e.side = sign > 0 ? Side::Buy : Side::Sell;
        e.exec_rate = sign > 0 ? target / (1 - c.fee_tier) : target * (1 - c.fee_tier);
        e.fee_x = fee;
        e.amount_y = fee / (c.fee_tier * e.exec_rate);
        e.pool_depth = c.depth;
        // the pool reverts to Z, so a file reader recovers the reference rate
        e.rate_after = c.rate;
        return e;
    };
    MarketEvent anchor;
    anchor.ts = c.start - 1;
    anchor.exec_rate = c.rate;
    anchor.pool_depth = c.depth;
    anchor.rate_after = c.rate;
    d.swaps.push_back(anchor);

    if (c.noise) {
        NormalStream rng(c.seed, Stream::Events, 0);
        const auto n = static_cast<double>(c.swaps_per_window);
        for (std::size_t w = 0; w < c.windows; ++w) {
            const std::int64_t begin = c.start + static_cast<std::int64_t>(w) * c.window;
            for (std::size_t k = 0; k < c.swaps_per_window; ++k) {
                // stratified uniform: one draw per 1/n slice
                const double u = (static_cast<double>(k) + rng.uniform()) / n;
                double v = u > 0 ? s_min / u : 2.0;
                if (v >= 1.99) v = 1.99;
                const int sign = rng.uniform() < 0.5 ? 1 : -1;
                const auto ts = begin + static_cast<std::int64_t>(static_cast<double>(k) / n * static_cast<double>(c.window));
                d.swaps.push_back(make_swap(ts, v, sign, pool_fees / n));
            }
        }
        return d;
    }

    std::vector<double> grid = c.spreads;
    if (grid.empty()) {
        const Eigen::VectorXd g = default_spread_grid();
        grid.assign(g.data(), g.data() + g.size());
    }
    std::sort(grid.begin(), grid.end());
    if (!(grid.front() >= 2 * s_min)) throw DomainError("smallest spread below 2 s, the design needs gamma / (4 pi)");
    if (!(grid.back() < 2.0)) throw DomainError("spreads must stay below 2");
    // captured share F(delta) = 1 - 2 s / delta, placed just inside each
    // grid half-spread; the remainder sits far outside every range
    for (std::size_t w = 0; w < c.windows; ++w) {
        const std::int64_t begin = c.start + static_cast<std::int64_t>(w) * c.window;
        double captured = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double share = 1 - 2 * s_min / grid[k];
            const double weight = share - captured;
            captured = share;
            if (weight > 0) d.swaps.push_back(make_swap(begin, grid[k] / 2 * (1 - 1e-9), 1, weight * pool_fees));
        }
        if (1 - captured > 0) d.swaps.push_back(make_swap(begin + 1, 1.5, 1, (1 - captured) * pool_fees));
    }
    return d;
}

}  // namespace clmm
