#!/usr/bin/env python3
"""Slow reference replay of the one-step rebalancing protocol.

Written independently of the C++ library with plain float loops, used once
to produce the golden reports under tests/data. Arithmetic follows the same
evaluation order as the library so both agree to the last bit.

usage: reference_backtest.py EVENTS OUT_PREFIX [--drift-mode zero|estimated]
                             [--drift-window SECONDS] [--gamma G]
writes OUT_PREFIX.report.csv and OUT_PREFIX.summary.csv
"""

import argparse
import bisect
import csv
import math

SECONDS_PER_DAY = 86400.0
NOT_PROFITABLE = 1
BELOW_SYMMETRIC_FLOOR = 2
BELOW_PROFITABILITY_FLOOR = 4
DRIFT_OUT_OF_RANGE = 8
SPREAD_OUT_OF_BOX = 16
NON_VIABLE = 32
ZERO_SPREAD = 64


def read_events(path):
    events = []
    with open(path, newline="", encoding="utf-8-sig") as fh:
        rows = csv.reader(fh)
        next(rows)
        for f in rows:
            if not f:
                continue
            e = {"ts": int(f[0]), "kind": f[1]}
            if f[1] == "swap":
                e.update(side=f[2], amount_y=float(f[3]), exec_rate=float(f[4]), fee_x=float(f[5]),
                         pool_depth=float(f[6]), rate_after=float(f[7]))
            else:
                e.update(wallet=f[8], tick_lower=int(f[9]), tick_upper=int(f[10]), position_depth=float(f[11]))
            events.append(e)
    return events


def tdiv(a, b):
    # C++ integer division truncates toward zero
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


def make_bars(swaps, step):
    first, last = swaps[0]["ts"], swaps[-1]["ts"]
    start = (tdiv(first, step) + 1) * step
    count = max(0, tdiv(last - start, step) + 1)
    j = 0
    while j < len(swaps) and swaps[j]["ts"] < start:
        j += 1
    if j == 0:
        raise ValueError("no swap before the first bar")
    rate = [swaps[j - 1]["rate_after"]]
    depth = [swaps[j - 1]["pool_depth"]]
    volume = [0.0]
    for i in range(1, count + 1):
        end = start + step * i
        r, d, v = rate[-1], depth[-1], 0.0
        while j < len(swaps) and swaps[j]["ts"] < end:
            r = swaps[j]["rate_after"]
            d = swaps[j]["pool_depth"]
            v += swaps[j]["amount_y"] * swaps[j]["exec_rate"]
            j += 1
        rate.append(r)
        depth.append(d)
        volume.append(v)
    return start, rate, depth, volume


def sigma_hat(rates, step):
    r = [math.log(rates[i + 1] / rates[i]) for i in range(len(rates) - 1)]
    n = float(len(r))
    s = 0.0
    for x in r:
        s += x
    mean = s / n
    ss = 0.0
    for x in r:
        ss += (x - mean) * (x - mean)
    return math.sqrt(ss / n) * math.sqrt(SECONDS_PER_DAY / step)


def drift_hat(rates, times):
    r = [math.log(rates[i + 1] / rates[i]) for i in range(len(rates) - 1)]
    n = float(len(r))
    s, span = 0.0, 0.0
    for i in range(len(r)):
        s += r[i]
        span += times[i + 1] - times[i]
    mean_dt = span / n / SECONDS_PER_DAY
    return s / n / mean_dt


def at_least(lhs, rhs):
    scale = max(abs(lhs), abs(rhs), 1e-300)
    return lhs >= rhs - 1e-12 * scale


def threshold(sigma, mu, eps):
    s2 = sigma * sigma
    return s2 / 8.0 - mu / 4.0 * (mu - s2 / 2.0) + eps / 4.0


def admissibility(pi, sigma, mu, gamma, eps, spread, dl, du):
    codes = 0
    s2 = sigma * sigma
    if not at_least(pi, threshold(sigma, mu, eps)):
        codes |= NOT_PROFITABLE
    adjusted = pi - gamma / 8.0
    if mu == 0.0 and not at_least(adjusted, s2 / 8.0):
        codes |= BELOW_SYMMETRIC_FLOOR
    floor = s2 / 8.0 * (mu * mu / 2.0 + 1.0) - mu / 4.0 * (mu - s2 / 2.0)
    if not at_least(adjusted, floor):
        codes |= BELOW_PROFITABILITY_FLOOR
    if abs(mu) > 1.0:
        codes |= DRIFT_OUT_OF_RANGE
    if math.isfinite(spread):
        if not at_least(spread, 2.0 * abs(mu)) or not at_least(4.0 - 2.0 * abs(mu), spread):
            codes |= SPREAD_OUT_OF_BOX
        if not at_least(4.0, spread):
            codes |= NON_VIABLE
        if spread == 0.0:
            codes |= ZERO_SPREAD
    else:
        codes |= NON_VIABLE
    if not (dl >= 0 and du >= 0) and not codes & SPREAD_OUT_OF_BOX:
        codes |= SPREAD_OUT_OF_BOX
    return codes


def policy(pi, sigma, drift, gamma, zeta, eps, tick_spread):
    mu = drift - zeta
    eta = threshold(sigma, mu, eps)
    if pi < eta:
        codes = NOT_PROFITABLE | admissibility(pi, sigma, mu, gamma, eps, math.inf, 0.0, 0.0)
        return codes, math.nan, math.nan
    spread = (2.0 * gamma + mu * mu * sigma * sigma) / (4.0 * (pi - eta) + eps)
    dl, du = spread / 2.0 - mu, spread / 2.0 + mu
    codes = admissibility(pi, sigma, mu, gamma, eps, spread, dl, du)
    if spread == 0.0 and tick_spread > 0.0:
        dl = du = tick_spread / 2.0
    return codes, dl, du


def legs_in_domain(dl, du):
    return dl > 0 and dl <= 2 and du >= 0 and du < 2 and dl * du / 2 < dl + du


def tick_rate(tick):
    return 1.0001 ** float(tick)


def round_range(lower, upper, grid):
    def nearest(z, prefer_lower):
        hi = bisect.bisect_left(grid, z)
        if hi == 0:
            return 0
        if hi == len(grid):
            return len(grid) - 1
        lo = hi - 1
        dlo, dhi = z - grid[lo], grid[hi] - z
        if dlo < dhi:
            return lo
        if dhi < dlo:
            return hi
        return lo if prefer_lower else hi

    lo = nearest(lower, True)
    hi = nearest(upper, False)
    if lo != hi:
        return grid[lo], grid[hi]
    mid = (lower + upper) / 2
    if (mid > grid[lo] and lo + 1 < len(grid)) or lo == 0:
        return grid[lo], grid[lo + 1]
    return grid[lo - 1], grid[lo]


def snap(lower, upper, z, spacing):
    unit = math.log(1.0001)
    s = float(spacing)
    k0 = int(math.floor(math.log(lower) / unit / s)) - 2
    k1 = int(math.ceil(math.log(upper) / unit / s)) + 2
    grid = [tick_rate(k * spacing) for k in range(k0, k1 + 1)]
    lo, up = round_range(lower, upper, grid)
    il, iu = bisect.bisect_left(grid, lo), bisect.bisect_left(grid, up)
    while not (lo < z <= up):
        if z <= lo:
            il -= 1
            lo = grid[il]
        else:
            iu += 1
            up = grid[iu]
    return lo, up


def holdings(z, lo, up, depth):
    inv_root_upper = 1 / math.sqrt(up)
    root_lower = math.sqrt(lo)
    if z <= lo:
        return 0.0, depth * (1 / root_lower - inv_root_upper)
    if z <= up:
        return depth * (math.sqrt(z) - root_lower), depth * (1 / math.sqrt(z) - inv_root_upper)
    return depth * (math.sqrt(up) - root_lower), 0.0


def fee_free(e, tau):
    return e["exec_rate"] * (1 - tau) if e["side"] == "buy" else e["exec_rate"] / (1 - tau)


def fee_share(kt, e, tau, lo, up):
    z = fee_free(e, tau)
    return kt / e["pool_depth"] * e["fee_x"] if lo < z <= up else 0.0


def stats(v):
    if not v:
        return 0.0, 0.0
    s = 0.0
    for x in v:
        s += x
    mean = s / float(len(v))
    if len(v) < 2:
        return mean, 0.0
    ss = 0.0
    for x in v:
        ss += (x - mean) * (x - mean)
    return mean, math.sqrt(ss / float(len(v) - 1))


def backtest(events, cfg):
    swaps = sorted((e for e in events if e["kind"] == "swap"), key=lambda e: e["ts"])
    step = cfg["step"]
    start, rate, depth_bar, volume = make_bars(swaps, step)
    window = cfg["in_sample"] // step
    drift_bars = cfg["drift_window"] // step
    last = len(rate) - 1
    tau = cfg["fee_tier"]
    window_days = float(window * step) / SECONDS_PER_DAY
    dt_days = float(step) / SECONDS_PER_DAY
    tick_spread = tick_rate(cfg["tick_spacing"]) - 1.0
    wealth = cfg["wealth"]
    is_open = False
    lo = up = kt = 0.0
    held_y = 0.0
    cursor = 0
    while cursor < len(swaps) and swaps[cursor]["ts"] < start + step * window:
        cursor += 1
    rows = []
    for b in range(window, last):
        ts = start + step * b
        z, z_next, pool_depth = rate[b], rate[b + 1], depth_bar[b]
        sigma = sigma_hat(rate[b - window:b + 1], float(step))
        v = 0.0
        for k in range(b - window + 1, b + 1):
            v += volume[k]
        pi = tau * v / (2.0 * pool_depth * math.sqrt(z)) / window_days
        mu = 0.0
        if cfg["drift_mode"] == "estimated":
            times = [float(start + step * (b - drift_bars + k)) for k in range(drift_bars + 1)]
            mu = drift_hat(rate[b - drift_bars:b + 1], times)
        y_old = holdings(z, lo, up, kt)[1] if is_open else held_y
        codes, dl, du = policy(pi, sigma, mu, cfg["gamma"], cfg["zeta"], cfg["epsilon"], tick_spread)
        codes &= ~ZERO_SPREAD
        legs_ok = math.isfinite(dl) and math.isfinite(du) and legs_in_domain(dl, du)
        if codes == 0 and not legs_ok:
            codes |= SPREAD_OUT_OF_BOX
        end = ts + step
        row = dict(ts=ts, deployed=0, codes=codes, rate=z, sigma=sigma, fee_rate=pi, drift=mu, delta_lower=0.0,
                   delta_upper=0.0, range_lower=0.0, range_upper=0.0, wealth=wealth, position_depth=0.0,
                   position_change=0.0, fees=0.0, rebalancing=0.0, gas=0.0)
        if codes == 0:
            root = math.sqrt(z)
            ru = root / (1 - du / 2)
            rl = root * (1 - dl / 2)
            lo, up = snap(rl * rl, ru * ru, z, cfg["tick_spacing"])
            leg_l = 2 * (1 - math.sqrt(lo / z))
            leg_u = 2 * (1 - math.sqrt(z / up))
            ux, uy = holdings(z, lo, up, 1.0)
            kt = wealth / (ux + uy * z)
            is_open = True
            y_new = holdings(z, lo, up, kt)[1]
            dy = abs(y_new - y_old)
            row.update(deployed=1, delta_lower=leg_l, delta_upper=leg_u, range_lower=lo, range_upper=up,
                       position_depth=kt)
            row["rebalancing"] = dy * dy * z ** 1.5 / pool_depth + tau * dy * z
            row["gas"] = cfg["gas_provide"] + cfg["gas_withdraw"] + (cfg["gas_take"] if dy > 0 else 0.0)
            spread = leg_l + leg_u
            row["position_change"] = wealth / spread * (-sigma * sigma / 2.0 * dt_days + leg_u * (z_next / z - 1.0))
            fees = 0.0
            while cursor < len(swaps) and swaps[cursor]["ts"] < end:
                fees += fee_share(kt, swaps[cursor], tau, lo, up)
                cursor += 1
            row["fees"] = fees
        else:
            if is_open:
                held_y = y_old
            is_open = False
            row["position_change"] = held_y * (z_next - z)
            while cursor < len(swaps) and swaps[cursor]["ts"] < end:
                cursor += 1
        row["total"] = row["position_change"] + row["fees"] - row["rebalancing"] - row["gas"]
        wealth = wealth + row["position_change"] - row["rebalancing"]
        rows.append(row)
    return rows


def benchmark(events, tau):
    prior, rate = [], math.nan
    mints = burns = 0
    for e in events:
        prior.append(rate)
        if e["kind"] == "swap":
            rate = e["rate_after"]
        elif e["kind"] == "mint":
            mints += 1
        else:
            burns += 1
    consumed = set()
    matched = unpriced = unmatched_mints = 0
    pairs = []
    for i, m in enumerate(events):
        if m["kind"] != "mint":
            continue
        burn = None
        for j in range(i + 1, len(events)):
            b = events[j]
            if b["kind"] != "burn" or b["wallet"] != m["wallet"] or j in consumed:
                continue
            if abs(b["position_depth"] - m["position_depth"]) <= 1e-9 * max(b["position_depth"], m["position_depth"]):
                burn = j
                break
        if burn is None:
            unmatched_mints += 1
            continue
        consumed.add(burn)
        matched += 1
        z0, z1 = prior[i], prior[burn]
        if math.isnan(z0) or math.isnan(z1):
            unpriced += 1
            continue
        d = m["position_depth"]
        lo, up = tick_rate(m["tick_lower"]), tick_rate(m["tick_upper"])
        x0, y0 = holdings(z0, lo, up, d)
        x1, y1 = holdings(z1, lo, up, d)
        v0, v1 = x0 + y0 * z0, x1 + y1 * z1
        fees = 0.0
        for k in range(i + 1, burn):
            if events[k]["kind"] == "swap":
                fees += fee_share(d, events[k], tau, lo, up)
        hold = float(events[burn]["ts"] - m["ts"]) / SECONDS_PER_DAY
        pairs.append(dict(perf=v1 / v0 - 1.0, fee=fees / v0, hold=hold, spread=(up - lo) / z0))
    lp = mints + burns
    out = dict(pairs=len(pairs), unmatched_mints=unmatched_mints, unmatched_burns=burns - matched,
               kept=2.0 * matched / lp if lp else 0.0)
    out["perf"] = stats([p["perf"] for p in pairs])
    out["fee"] = stats([p["fee"] for p in pairs])
    out["hold"] = stats([p["hold"] for p in pairs])
    out["spread"] = stats([p["spread"] for p in pairs])
    out["perf_min"] = stats([p["perf"] / (p["hold"] * 1440.0) for p in pairs if p["hold"] > 0])
    out["fee_min"] = stats([p["fee"] / (p["hold"] * 1440.0) for p in pairs if p["hold"] > 0])
    return out


def summary(rows, bench):
    dep = [r for r in rows if r["deployed"]]
    entries = [("operations", float(len(dep))), ("withdrawn", float(len(rows) - len(dep)))]

    def add(name, s):
        entries.append((name + "_mean", s[0]))
        entries.append((name + "_sd", s[1]))

    add("position_change", stats([r["position_change"] / r["wealth"] for r in dep]))
    add("fees", stats([r["fees"] / r["wealth"] for r in dep]))
    add("rebalancing", stats([r["rebalancing"] / r["wealth"] for r in dep]))
    add("gas", stats([r["gas"] / r["wealth"] for r in dep]))
    add("total_without_gas", stats([(r["position_change"] + r["fees"] - r["rebalancing"]) / r["wealth"] for r in dep]))
    add("total", stats([r["total"] / r["wealth"] for r in dep]))
    final = rows[-1]["wealth"] + rows[-1]["position_change"] - rows[-1]["rebalancing"] if rows else 0.0
    fee_account = gas_paid = 0.0
    for r in rows:
        fee_account += r["fees"]
        gas_paid += r["gas"]
    entries += [("final_wealth", final), ("fee_account", fee_account), ("gas_paid", gas_paid)]
    if bench is not None:
        entries += [("benchmark_pairs", float(bench["pairs"])),
                    ("benchmark_unmatched_mints", float(bench["unmatched_mints"])),
                    ("benchmark_unmatched_burns", float(bench["unmatched_burns"])),
                    ("benchmark_kept_fraction", bench["kept"])]
        add("benchmark_performance", bench["perf"])
        add("benchmark_fee_return", bench["fee"])
        add("benchmark_hold_days", bench["hold"])
        add("benchmark_spread", bench["spread"])
        add("benchmark_performance_per_minute", bench["perf_min"])
        add("benchmark_fee_return_per_minute", bench["fee_min"])
    return entries


COLUMNS = ["rate", "sigma", "fee_rate", "drift", "delta_lower", "delta_upper", "range_lower", "range_upper", "wealth",
           "position_depth", "position_change", "fees", "rebalancing", "gas", "total"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("events")
    ap.add_argument("out_prefix")
    ap.add_argument("--drift-mode", choices=["zero", "estimated"], default="zero")
    ap.add_argument("--drift-window", type=int, default=300)
    ap.add_argument("--gamma", type=float, default=5e-7)
    args = ap.parse_args()
    cfg = dict(step=60, in_sample=86400, drift_window=args.drift_window, gamma=args.gamma, epsilon=1e-4, zeta=0.0, gas_provide=30.7,
               gas_withdraw=24.5, gas_take=29.6, wealth=1e6, fee_tier=0.0005, tick_spacing=10,
               drift_mode=args.drift_mode)
    events = read_events(args.events)
    rows = backtest(events, cfg)
    bench = benchmark(events, cfg["fee_tier"]) if any(e["kind"] != "swap" for e in events) else None
    with open(args.out_prefix + ".report.csv", "w", newline="\n") as fh:
        fh.write("ts,deployed,codes," + ",".join(COLUMNS) + "\n")
        for r in rows:
            fh.write("%d,%d,%d," % (r["ts"], r["deployed"], r["codes"]))
            fh.write(",".join("%.12e" % r[c] for c in COLUMNS) + "\n")
    with open(args.out_prefix + ".summary.csv", "w", newline="\n") as fh:
        fh.write("metric,value\n")
        for name, value in summary(rows, bench):
            fh.write("%s,%.12e\n" % (name, value))


if __name__ == "__main__":
    main()
