#!/usr/bin/env python3
"""Write a 50-row pool log with planted mint/burn pairs and the expected
benchmark table computed by hand from closed forms.

usage: make_benchmark_log.py OUT_DIR
writes OUT_DIR/benchmark_50.csv, benchmark_50.pairs.csv, benchmark_50.expected.csv
"""

import math
import statistics
import sys
from pathlib import Path

TAU = 0.0005
T0 = 1_700_000_000
POOL_DEPTH = 1.0e6


def tick_rate(t):
    return 1.0001 ** t


rows = []  # dicts in file order
rate = 1800.0


def swap(ts, side, target):
    """A swap that leaves the pool at `target`; fee-free rate is the midpoint."""
    global rate
    mid = math.sqrt(rate * target)
    exec_rate = mid / (1 - TAU) if side == "buy" else mid * (1 - TAU)
    amount = 10.0
    rows.append(dict(ts=ts, kind="swap", side=side, amount_y=amount, exec_rate=exec_rate,
                     fee_x=TAU * amount * exec_rate, pool_depth=POOL_DEPTH, rate_after=target, free=mid))
    rate = target


def lp(ts, kind, wallet, lo, hi, depth):
    rows.append(dict(ts=ts, kind=kind, wallet=wallet, tick_lower=lo, tick_upper=hi, position_depth=depth))
    return len(rows) - 1


planted = []  # (mint row, burn row)
t = T0
swap(t, "buy", 1801.0)
early_burn = lp(t + 5, "burn", "0xc", 74000, 76000, 2000.0)  # burn with no earlier mint
m_a1 = lp(t + 10, "mint", "0xa", 74000, 76000, 5000.0)
m_b1 = lp(t + 12, "mint", "0xb", 74800, 75200, 3000.0)
m_e = lp(t + 13, "mint", "0xe", 70000, 72000, 7000.0)  # entirely below the rate
swap(t + 20, "sell", 1799.5)
m_a2 = lp(t + 25, "mint", "0xa", 74000, 76000, 5000.0)  # same wallet and depth as m_a1
m_d = lp(t + 30, "mint", "0xd", 74500, 75500, 1000.0)  # never burned
swap(t + 40, "buy", 1805.0)
m_b2 = lp(t + 45, "mint", "0xb", 74900, 75100, 4000.0)
swap(t + 60, "buy", 1812.0)
swap(t + 80, "sell", 1808.0)
m_z = lp(t + 90, "mint", "0xf", 74950, 75050, 500.0)
b_z = lp(t + 90, "burn", "0xf", 74950, 75050, 500.0)  # zero hold
planted.append((m_z, b_z))
for k in range(10):
    swap(t + 120 + 30 * k, "buy" if k % 3 else "sell", 1808.0 + (k - 3) * 1.7)
b_a1 = lp(t + 450, "burn", "0xa", 74000, 76000, 5000.0)
planted.append((m_a1, b_a1))
b_b2 = lp(t + 460, "burn", "0xb", 74900, 75100, 4100.0)  # depth differs: unmatched
for k in range(8):
    swap(t + 500 + 40 * k, "sell" if k % 2 else "buy", 1812.0 - 2.1 * k)
b_b1 = lp(t + 850, "burn", "0xb", 74800, 75200, 3000.0 * (1 + 1e-12))  # within tolerance
planted.append((m_b1, b_b1))
m_c = lp(t + 860, "mint", "0xc", 74000, 76000, 2000.0)
b_e = lp(t + 870, "burn", "0xe", 70000, 72000, 7000.0)
planted.append((m_e, b_e))
for k in range(5):
    swap(t + 900 + 50 * k, "buy", 1797.0 + 3.3 * k)
b_a2 = lp(t + 1200, "burn", "0xa", 74000, 76000, 5000.0)
planted.append((m_a2, b_a2))
swap(t + 1230, "sell", 1806.0)
b_c = lp(t + 1300, "burn", "0xc", 74000, 76000, 2000.0)
planted.append((m_c, b_c))
while len(rows) < 50:
    swap(t + 1400 + 10 * len(rows), "buy", 1806.0 + 0.1 * len(rows))
assert len(rows) == 50, len(rows)
planted.sort()


def value(z, lo, hi, depth):
    a, b = math.sqrt(tick_rate(lo)), math.sqrt(tick_rate(hi))
    s = min(max(math.sqrt(z), a), b)
    x = depth * (s - a)
    y = depth * (1 / s - 1 / b)
    return x + y * z


def prior_rate(i):
    for j in range(i - 1, -1, -1):
        if rows[j]["kind"] == "swap":
            return rows[j]["rate_after"]
    raise ValueError("unpriced")


pairs = []
for m, b in planted:
    r = rows[m]
    lo, hi, depth = r["tick_lower"], r["tick_upper"], r["position_depth"]
    z0, z1 = prior_rate(m), prior_rate(b)
    v0, v1 = value(z0, lo, hi, depth), value(z1, lo, hi, depth)
    zl, zu = tick_rate(lo), tick_rate(hi)
    fees = sum(depth / e["pool_depth"] * e["fee_x"] for e in rows[m + 1:b]
               if e["kind"] == "swap" and zl < e["free"] <= zu)
    hold = (rows[b]["ts"] - r["ts"]) / 86400
    pairs.append(dict(mint=m, burn=b, perf=v1 / v0 - 1, fee=fees / v0, hold=hold, spread=(zu - zl) / z0))

mints = sum(r["kind"] == "mint" for r in rows)
burns = sum(r["kind"] == "burn" for r in rows)


def stat(xs):
    return statistics.fmean(xs), (statistics.stdev(xs) if len(xs) > 1 else 0.0)


timed = [p for p in pairs if p["hold"] > 0]
expected = {
    "pairs": len(pairs),
    "mints": mints,
    "burns": burns,
    "unmatched_mints": mints - len(pairs),
    "unmatched_burns": burns - len(pairs),
    "kept_fraction": 2 * len(pairs) / (mints + burns),
}
for name, key in [("performance", "perf"), ("fee_return", "fee"), ("hold_days", "hold"), ("spread", "spread")]:
    expected[name + "_mean"], expected[name + "_sd"] = stat([p[key] for p in pairs])
for name, key in [("performance_per_minute", "perf"), ("fee_return_per_minute", "fee")]:
    expected[name + "_mean"], expected[name + "_sd"] = stat([p[key] / (p["hold"] * 1440) for p in timed])

out = Path(sys.argv[1])
cols = ["ts", "kind", "side", "amount_y", "exec_rate", "fee_x", "pool_depth", "rate_after", "wallet",
        "tick_lower", "tick_upper", "position_depth"]
with open(out / "benchmark_50.csv", "w") as f:
    f.write(",".join(cols) + "\n")
    for r in rows:
        f.write(",".join("" if c not in r else repr(r[c]) if isinstance(r[c], float) else str(r[c])
                         for c in cols) + "\n")
with open(out / "benchmark_50.pairs.csv", "w") as f:
    f.write("mint_index,burn_index,performance,fee_return,hold_days,spread\n")
    for p in pairs:
        f.write(f"{p['mint']},{p['burn']},{p['perf']!r},{p['fee']!r},{p['hold']!r},{p['spread']!r}\n")
with open(out / "benchmark_50.expected.csv", "w") as f:
    f.write("metric,value\n")
    for k, v in expected.items():
        f.write(f"{k},{v!r}\n")
