#include "clmm/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

#include "clmm/errors.hpp"
#include "clmm/estimation.hpp"

namespace clmm {

namespace {

// Sample statistics in one left-to-right pass each, so that a reference
// implementation summing in the same order gets identical bits.
ComponentStats stats(const std::vector<double>& v) {
    ComponentStats s;
    if (v.empty()) return s;
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    if (v.size() < 2) return s;
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std_dev = std::sqrt(ss / static_cast<double>(v.size() - 1));
    return s;
}

// Round a range onto the implicit grid 1.0001^(spacing k), then widen one
// tick at a time until the current rate is inside.
RateRange<double> snap_to_grid(const RateRange<double>& range, double rate, std::int64_t spacing) {
    const double unit = std::log(1.0001);
    const double s = static_cast<double>(spacing);
    const auto lo = static_cast<std::int64_t>(std::floor(std::log(range.lower) / unit / s)) - 2;
    const auto hi = static_cast<std::int64_t>(std::ceil(std::log(range.upper) / unit / s)) + 2;
    std::vector<double> grid;
    for (std::int64_t k = lo; k <= hi; ++k) grid.push_back(tick_to_rate(k * spacing));
    auto r = round_to_ticks(range, grid);
    auto index = [&](double z) {
        return static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), z) - grid.begin());
    };
    std::size_t il = index(r.lower), iu = index(r.upper);
    while (!r.contains(rate)) {
        if (rate <= r.lower) {
            if (il == 0) throw NumericError("tick grid too short below the rate");
            r.lower = grid[--il];
        } else {
            if (iu + 1 >= grid.size()) throw NumericError("tick grid too short above the rate");
            r.upper = grid[++iu];
        }
    }
    return r;
}

std::size_t first_swap_at_or_after(const std::vector<MarketEvent>& swaps, std::int64_t t) {
    return static_cast<std::size_t>(
        std::lower_bound(swaps.begin(), swaps.end(), t, [](const MarketEvent& e, std::int64_t v) { return e.ts < v; }) -
        swaps.begin());
}

}  // namespace

void BacktestConfig::validate() const {
    if (step <= 0) throw DomainError("rebalance step must be positive");
    if (in_sample < step) throw DomainError("in-sample window must be at least one step");
    if (drift_window < step || drift_window > in_sample)
        throw DomainError("drift window must lie between one step and the in-sample window");
    if (!(gamma >= 0)) throw DomainError("gamma must be nonnegative");
    if (!(epsilon > 0)) throw DomainError("epsilon must be positive");
    if (!(gas.provide >= 0 && gas.withdraw >= 0 && gas.take >= 0)) throw DomainError("gas fees must be nonnegative");
    if (!(initial_wealth > 0)) throw DomainError("initial wealth must be positive");
    if (!(fee_tier >= 0 && fee_tier < 1)) throw DomainError("fee tier must lie in [0, 1)");
    if (tick_spacing <= 0) throw DomainError("tick spacing must be positive");
}

BacktestReport run_backtest(std::span<const MarketEvent> events, const BacktestConfig& config) {
    config.validate();
    const auto swaps = swaps_only(events);
    if (swaps.empty()) throw DataError("event log holds no swaps");
    const RateBars bars = make_bars(swaps, config.step);
    const Eigen::Index window = config.in_sample / config.step;
    const Eigen::Index drift_bars = config.drift_window / config.step;
    const Eigen::Index last = bars.rate.size() - 1;
    if (last < window + 1) throw DataError("swaps must cover the in-sample window plus one step");

    const double tau = config.fee_tier;
    const double window_days = static_cast<double>(window * config.step) / kSecondsPerDay;
    const double dt_days = static_cast<double>(config.step) / kSecondsPerDay;
    const double tick_spread = tick_to_rate(config.tick_spacing) - 1.0;
    const auto step_seconds = static_cast<double>(config.step);

    BacktestReport report;
    report.config = config;
    double wealth = config.initial_wealth;
    bool open = false;
    RateRange<double> range{};
    double depth = 0.0, held_y = 0.0;
    std::size_t cursor = first_swap_at_or_after(swaps, bars.time(window));

    for (Eigen::Index b = window; b < last; ++b) {
        BacktestRow row;
        row.ts = bars.time(b);
        row.rate = bars.rate[b];
        row.wealth = wealth;
        const double z = bars.rate[b], z_next = bars.rate[b + 1], pool_depth = bars.depth[b];
        row.sigma = estimate_sigma(bars.rate.segment(b - window, window + 1), step_seconds);
        double volume = 0.0;
        for (Eigen::Index k = b - window + 1; k <= b; ++k) volume += bars.volume[k];
        row.fee_rate = estimate_pool_fee_rate(volume, pool_depth, z, tau, window_days);
        if (config.drift_mode == DriftMode::Estimated) {
            Eigen::VectorXd times(drift_bars + 1);
            for (Eigen::Index k = 0; k <= drift_bars; ++k) times[k] = static_cast<double>(bars.time(b - drift_bars + k));
            row.drift = estimate_drift(bars.rate.segment(b - drift_bars, drift_bars + 1), times);
        }
        const double y_old = open ? holdings_for_position(z, range, depth).y : held_y;

        const PolicyInputs in{row.fee_rate, row.sigma, row.drift, config.gamma, config.zeta, config.epsilon};
        const PolicyOutput policy = evaluate_policy(in, tick_spread);
        row.codes = policy.admissibility.codes & ~static_cast<std::uint32_t>(Violation::ZeroSpread);
        const bool legs_ok = std::isfinite(policy.delta_lower) && std::isfinite(policy.delta_upper) &&
                             legs_in_domain(policy.delta_lower, policy.delta_upper);
        if (row.codes == 0 && !legs_ok) row.codes |= static_cast<std::uint32_t>(Violation::SpreadOutOfBox);

        const std::int64_t end = row.ts + config.step;
        if (row.codes == 0) {
            range = snap_to_grid(range_from_spread(z, policy.delta_lower, policy.delta_upper), z, config.tick_spacing);
            const auto legs = spread_from_range(z, range);
            depth = depth_for_range(wealth, z, range);
            open = true;
            const double y_new = holdings_for_position(z, range, depth).y;
            const double dy = std::abs(y_new - y_old);
            row.deployed = true;
            row.delta_lower = legs.lower;
            row.delta_upper = legs.upper;
            row.range_lower = range.lower;
            row.range_upper = range.upper;
            row.position_depth = depth;
            row.rebalancing = dy * dy * std::pow(z, 1.5) / pool_depth + tau * dy * z;
            row.gas = config.gas.provide + config.gas.withdraw + (dy > 0 ? config.gas.take : 0.0);
            const double spread = legs.lower + legs.upper;
            row.position_change =
                wealth / spread * (-row.sigma * row.sigma / 2.0 * dt_days + legs.upper * (z_next / z - 1.0));
            for (; cursor < swaps.size() && swaps[cursor].ts < end; ++cursor) {
                const auto& e = swaps[cursor];
                row.fees += fee_share(depth, e.pool_depth, e.fee_x, fee_free_rate(e, tau), range);
            }
        } else {
            if (open) held_y = y_old;
            open = false;
            row.position_change = held_y * (z_next - z);
            while (cursor < swaps.size() && swaps[cursor].ts < end) ++cursor;
        }
        row.total = row.position_change + row.fees - row.rebalancing - row.gas;
        wealth = wealth + row.position_change - row.rebalancing;
        if (!(wealth > 0) || !std::isfinite(wealth))
            throw NumericError("wealth left the positive reals at ts=" + std::to_string(row.ts));
        report.rows.push_back(row);
    }
    report.aggregates = aggregate(report.rows);
    bool has_lp = false;
    for (const auto& e : events) has_lp = has_lp || !e.is_swap();
    if (has_lp) report.benchmark = extract_benchmark(events, tau);
    return report;
}

BacktestAggregates aggregate(std::span<const BacktestRow> rows) {
    BacktestAggregates a;
    std::vector<double> alpha, fees, rebal, gas, net, total;
    for (const auto& r : rows) {
        a.fee_account += r.fees;
        a.gas_paid += r.gas;
        if (!r.deployed) {
            ++a.withdrawn;
            continue;
        }
        ++a.operations;
        alpha.push_back(r.position_change / r.wealth);
        fees.push_back(r.fees / r.wealth);
        rebal.push_back(r.rebalancing / r.wealth);
        gas.push_back(r.gas / r.wealth);
        net.push_back((r.position_change + r.fees - r.rebalancing) / r.wealth);
        total.push_back(r.total / r.wealth);
    }
    a.position_change = stats(alpha);
    a.fees = stats(fees);
    a.rebalancing = stats(rebal);
    a.gas = stats(gas);
    a.total_without_gas = stats(net);
    a.total = stats(total);
    if (!rows.empty()) {
        const auto& r = rows.back();
        a.final_wealth = r.wealth + r.position_change - r.rebalancing;
    }
    return a;
}

BenchmarkSummary extract_benchmark(std::span<const MarketEvent> events, double fee_tier) {
    BenchmarkSummary out;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> prior_rate(events.size(), nan);
    std::map<std::string, std::vector<std::size_t>> burns_by_wallet;
    double rate = nan;
    for (std::size_t i = 0; i < events.size(); ++i) {
        prior_rate[i] = rate;
        const auto& e = events[i];
        if (e.is_swap()) rate = e.rate_after;
        else if (e.kind == EventKind::Mint) ++out.mints;
        else {
            ++out.burns;
            burns_by_wallet[e.wallet].push_back(i);
        }
    }
    std::vector<bool> consumed(events.size(), false);
    std::size_t matched = 0;
    std::set<std::string> wallets;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& m = events[i];
        if (m.kind != EventKind::Mint) continue;
        std::size_t burn = events.size();
        if (auto it = burns_by_wallet.find(m.wallet); it != burns_by_wallet.end()) {
            for (std::size_t j : it->second) {
                if (j <= i || consumed[j]) continue;
                const double d = events[j].position_depth;
                if (std::abs(d - m.position_depth) <= 1e-9 * std::max(d, m.position_depth)) {
                    burn = j;
                    break;
                }
            }
        }
        if (burn == events.size()) {
            ++out.unmatched_mints;
            continue;
        }
        consumed[burn] = true;
        ++matched;
        const double z0 = prior_rate[i], z1 = prior_rate[burn];
        if (std::isnan(z0) || std::isnan(z1)) {
            ++out.unpriced;
            continue;
        }
        BenchmarkPair p;
        p.mint_index = i;
        p.burn_index = burn;
        p.wallet = m.wallet;
        p.depth = m.position_depth;
        p.rate_open = z0;
        p.rate_close = z1;
        const RateRange<double> r{tick_to_rate(m.tick_lower), tick_to_rate(m.tick_upper)};
        p.value_open = position_value(holdings_for_position(z0, r, p.depth), z0);
        p.value_close = position_value(holdings_for_position(z1, r, p.depth), z1);
        double fees = 0.0;
        for (std::size_t k = i + 1; k < burn; ++k) {
            const auto& e = events[k];
            if (e.is_swap()) fees += fee_share(p.depth, e.pool_depth, e.fee_x, fee_free_rate(e, fee_tier), r);
        }
        p.performance = p.value_close / p.value_open - 1.0;
        p.fee_return = fees / p.value_open;
        p.hold_days = static_cast<double>(events[burn].ts - m.ts) / kSecondsPerDay;
        p.spread = (r.upper - r.lower) / z0;
        wallets.insert(p.wallet);
        out.pairs.push_back(std::move(p));
    }
    out.unmatched_burns = out.burns - matched;
    out.wallets = wallets.size();
    const std::size_t lp_ops = out.mints + out.burns;
    out.kept_fraction = lp_ops ? 2.0 * static_cast<double>(matched) / static_cast<double>(lp_ops) : 0.0;
    std::vector<double> perf, fee, hold, spread, perf_min, fee_min;
    for (const auto& p : out.pairs) {
        perf.push_back(p.performance);
        fee.push_back(p.fee_return);
        hold.push_back(p.hold_days);
        spread.push_back(p.spread);
        if (p.hold_days > 0) {
            const double minutes = p.hold_days * 1440.0;
            perf_min.push_back(p.performance / minutes);
            fee_min.push_back(p.fee_return / minutes);
        }
    }
    out.performance = stats(perf);
    out.fee_return = stats(fee);
    out.hold_days = stats(hold);
    out.spread = stats(spread);
    out.performance_per_minute = stats(perf_min);
    out.fee_return_per_minute = stats(fee_min);
    return out;
}

std::vector<AsymmetryCell> asymmetry_sweep(std::span<const MarketEvent> events, const AsymmetrySweepConfig& config) {
    if (config.spreads.empty() || config.asymmetries.empty()) throw DomainError("spread and asymmetry grids must be nonempty");
    if (config.drift_edges.size() < 2) throw DomainError("need at least two drift bin edges");
    for (std::size_t i = 1; i < config.drift_edges.size(); ++i)
        if (!(config.drift_edges[i] > config.drift_edges[i - 1])) throw DomainError("drift bin edges must increase");
    for (double d : config.spreads)
        if (!(d > 0 && d < 2)) throw DomainError("spreads must lie in (0, 2)");
    for (double r : config.asymmetries)
        if (!(r >= 0 && r <= 1)) throw DomainError("asymmetries must lie in [0, 1]");
    if (config.drift_step <= 0 || config.horizon <= 0 || config.horizon % config.drift_step != 0)
        throw DomainError("horizon must be a positive multiple of the drift step");

    const auto swaps = swaps_only(events);
    if (swaps.empty()) throw DataError("event log holds no swaps");
    const RateBars bars = make_bars(swaps, config.drift_step);
    const Eigen::Index per_window = config.horizon / config.drift_step;
    const std::size_t bins = config.drift_edges.size() - 1, ns = config.spreads.size(), nr = config.asymmetries.size();
    std::vector<double> revenue(bins * ns * nr, 0.0);
    std::vector<std::size_t> count(bins, 0);

    for (Eigen::Index s = 0; s + per_window < bars.rate.size(); s += per_window) {
        Eigen::VectorXd times(per_window + 1);
        for (Eigen::Index k = 0; k <= per_window; ++k) times[k] = static_cast<double>(bars.time(s + k));
        const double mu = estimate_drift(bars.rate.segment(s, per_window + 1), times);
        const auto edge = std::upper_bound(config.drift_edges.begin(), config.drift_edges.end(), mu);
        if (edge == config.drift_edges.begin() || edge == config.drift_edges.end()) continue;
        const auto bin = static_cast<std::size_t>(edge - config.drift_edges.begin()) - 1;
        ++count[bin];
        const double z = bars.rate[s];
        const std::int64_t begin = bars.time(s), end = bars.time(s + per_window);
        for (std::size_t a = 0; a < ns; ++a) {
            const double delta = config.spreads[a];
            const double depth = 2.0 / (std::sqrt(z) * delta);
            for (std::size_t c = 0; c < nr; ++c) {
                const double rho = config.asymmetries[c];
                const double lower_root = std::sqrt(z) * (1 - (1 - rho) * delta / 2);
                const double upper_root = std::sqrt(z) / (1 - rho * delta / 2);
                const RateRange<double> r{lower_root * lower_root, upper_root * upper_root};
                double fees = 0.0;
                for (std::size_t j = first_swap_at_or_after(swaps, begin); j < swaps.size() && swaps[j].ts < end; ++j) {
                    const auto& e = swaps[j];
                    fees += fee_share(depth, e.pool_depth, e.fee_x, fee_free_rate(e, config.fee_tier), r);
                }
                revenue[(bin * ns + a) * nr + c] += fees;
            }
        }
    }

    std::vector<AsymmetryCell> out;
    for (std::size_t bin = 0; bin < bins; ++bin) {
        if (count[bin] == 0) continue;
        for (std::size_t a = 0; a < ns; ++a) {
            AsymmetryCell cell;
            cell.drift_lower = config.drift_edges[bin];
            cell.drift_upper = config.drift_edges[bin + 1];
            cell.windows = count[bin];
            cell.spread = config.spreads[a];
            cell.best_revenue = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < nr; ++c) {
                const double v = revenue[(bin * ns + a) * nr + c] / static_cast<double>(count[bin]);
                const double rho = config.asymmetries[c];
                const bool better = v > cell.best_revenue ||
                                    (v == cell.best_revenue && std::abs(rho - 0.5) < std::abs(cell.best_asymmetry - 0.5));
                if (better) {
                    cell.best_revenue = v;
                    cell.best_asymmetry = rho;
                }
            }
            out.push_back(cell);
        }
    }
    return out;
}

std::optional<double> breakeven_wealth(double return_per_op, double gas_per_op) {
    if (!(gas_per_op >= 0)) throw DomainError("gas must be nonnegative");
    if (!(return_per_op > 0)) return std::nullopt;
    return gas_per_op / return_per_op;
}

FeeCapacity fee_capacity(std::span<const MarketEvent> events, double fee_tier, double horizon_minutes) {
    FeeCapacity out;
    std::int64_t first = 0, last = 0;
    double volume = 0.0;
    for (const auto& e : events) {
        if (!e.is_swap()) continue;
        if (out.swaps == 0) first = e.ts;
        last = e.ts;
        ++out.swaps;
        volume += e.notional();
    }
    if (out.swaps == 0) return out;
    auto minute = [](std::int64_t t) { return t >= 0 ? t / 60 : -((-t + 59) / 60); };
    out.minutes = static_cast<std::size_t>(minute(last) - minute(first) + 1);
    const auto m = static_cast<double>(out.minutes);
    out.swaps_per_minute = static_cast<double>(out.swaps) / m;
    out.volume_per_minute = volume / m;
    out.fee_ceiling = fee_tier * out.volume_per_minute * horizon_minutes;
    return out;
}

std::string format_report_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

void write_report_csv(std::ostream& out, const BacktestReport& report) {
    out << "ts,deployed,codes,rate,sigma,fee_rate,drift,delta_lower,delta_upper,range_lower,range_upper,wealth,"
           "position_depth,position_change,fees,rebalancing,gas,total\n";
    for (const auto& r : report.rows) {
        out << r.ts << ',' << (r.deployed ? 1 : 0) << ',' << r.codes;
        for (double v : {r.rate, r.sigma, r.fee_rate, r.drift, r.delta_lower, r.delta_upper, r.range_lower,
                         r.range_upper, r.wealth, r.position_depth, r.position_change, r.fees, r.rebalancing, r.gas,
                         r.total})
            out << ',' << format_report_number(v);
        out << '\n';
    }
}

std::vector<std::pair<std::string, double>> summary_entries(const BacktestReport& report) {
    const auto& a = report.aggregates;
    std::vector<std::pair<std::string, double>> e;
    e.emplace_back("operations", static_cast<double>(a.operations));
    e.emplace_back("withdrawn", static_cast<double>(a.withdrawn));
    auto add = [&](const std::string& name, const ComponentStats& s) {
        e.emplace_back(name + "_mean", s.mean);
        e.emplace_back(name + "_sd", s.std_dev);
    };
    add("position_change", a.position_change);
    add("fees", a.fees);
    add("rebalancing", a.rebalancing);
    add("gas", a.gas);
    add("total_without_gas", a.total_without_gas);
    add("total", a.total);
    e.emplace_back("final_wealth", a.final_wealth);
    e.emplace_back("fee_account", a.fee_account);
    e.emplace_back("gas_paid", a.gas_paid);
    if (report.benchmark) {
        const auto& b = *report.benchmark;
        e.emplace_back("benchmark_pairs", static_cast<double>(b.pairs.size()));
        e.emplace_back("benchmark_unmatched_mints", static_cast<double>(b.unmatched_mints));
        e.emplace_back("benchmark_unmatched_burns", static_cast<double>(b.unmatched_burns));
        e.emplace_back("benchmark_kept_fraction", b.kept_fraction);
        add("benchmark_performance", b.performance);
        add("benchmark_fee_return", b.fee_return);
        add("benchmark_hold_days", b.hold_days);
        add("benchmark_spread", b.spread);
        add("benchmark_performance_per_minute", b.performance_per_minute);
        add("benchmark_fee_return_per_minute", b.fee_return_per_minute);
    }
    return e;
}

void write_summary_csv(std::ostream& out, const BacktestReport& report) {
    out << "metric,value\n";
    for (const auto& [name, value] : summary_entries(report)) out << name << ',' << format_report_number(value) << '\n';
}

void write_spread_distribution_csv(std::ostream& out, std::span<const BacktestRow> rows, std::size_t bins) {
    if (bins == 0) throw DomainError("need at least one bin");
    double top = 0.0;
    for (const auto& r : rows)
        if (r.deployed) top = std::max(top, r.delta_lower + r.delta_upper);
    std::vector<std::size_t> count(bins, 0);
    const double width = top > 0 ? top / static_cast<double>(bins) : 1.0;
    for (const auto& r : rows) {
        if (!r.deployed) continue;
        auto k = static_cast<std::size_t>((r.delta_lower + r.delta_upper) / width);
        count[std::min(k, bins - 1)] += 1;
    }
    out << "spread_lower,spread_upper,count\n";
    for (std::size_t k = 0; k < bins; ++k)
        out << format_report_number(width * static_cast<double>(k)) << ','
            << format_report_number(width * static_cast<double>(k + 1)) << ',' << count[k] << '\n';
}

void write_fee_rate_csv(std::ostream& out, std::span<const BacktestRow> rows) {
    out << "ts,fee_rate,sigma,drift\n";
    for (const auto& r : rows)
        out << r.ts << ',' << format_report_number(r.fee_rate) << ',' << format_report_number(r.sigma) << ','
            << format_report_number(r.drift) << '\n';
}

void write_benchmark_csv(std::ostream& out, const BenchmarkSummary& summary) {
    out << "mint_row,burn_row,wallet,depth,rate_open,rate_close,performance,fee_return,hold_days,spread\n";
    for (const auto& p : summary.pairs)
        out << p.mint_index << ',' << p.burn_index << ',' << csv_field(p.wallet) << ',' << format_report_number(p.depth)
            << ',' << format_report_number(p.rate_open) << ',' << format_report_number(p.rate_close) << ','
            << format_report_number(p.performance) << ',' << format_report_number(p.fee_return) << ','
            << format_report_number(p.hold_days) << ',' << format_report_number(p.spread) << '\n';
}

void write_asymmetry_csv(std::ostream& out, std::span<const AsymmetryCell> cells) {
    out << "drift_lower,drift_upper,windows,spread,best_asymmetry,best_revenue\n";
    for (const auto& c : cells)
        out << format_report_number(c.drift_lower) << ',' << format_report_number(c.drift_upper) << ',' << c.windows
            << ',' << format_report_number(c.spread) << ',' << format_report_number(c.best_asymmetry) << ','
            << format_report_number(c.best_revenue) << '\n';
}

}  // namespace clmm
