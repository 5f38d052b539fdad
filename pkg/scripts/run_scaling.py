#!/usr/bin/env python3
"""Per-cycle runtime versus the number of variables.

Times the update cycles over a geometric grid of p, isolating per-cycle cost
as (multi-cycle time - one-cycle time) / (cycles - 1) with best-of-N totals,
and fits a log-log slope.  A slope near 1 confirms the O(p) cycle cost.
"""

import argparse
import sys
import time
from dataclasses import replace

import numpy as np

from vbda import Dataset, Hyperparameters, fit_vlda


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ps", default="2000,20000,200000",
                    help="comma-separated variable counts")
    ap.add_argument("--n", type=int, default=109)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=3)
    return ap.parse_args()


def graded_dataset(n, p, seed):
    # a band of graded shifts keeps the fit busy for a realistic cycle count
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 2
    X = rng.standard_normal((n, p))
    k = min(p // 10, 60)
    X[y == 1, :k] += np.linspace(0.2, 1.2, k)
    return Dataset(X, y)


def best_of(repeats, d, h):
    best, state = np.inf, None
    for _ in range(repeats):
        t0 = time.perf_counter()
        state = fit_vlda(d, h)
        best = min(best, time.perf_counter() - t0)
    return best, state


def main():
    args = parse_args()
    ps = [int(tok) for tok in args.ps.split(",") if tok]
    h = Hyperparameters()
    h_multi = replace(h, eps=1e-20, max_cycles=500)
    h_one = replace(h, max_cycles=1)

    per_cycle = []
    print(f"{'p':>8} {'cycles':>7} {'multi s':>9} {'one s':>9} {'per-cycle s':>12}")
    for p in ps:
        d = graded_dataset(args.n, p, args.seed)
        t_multi, f = best_of(args.repeats, d, h_multi)
        t_one, _ = best_of(args.repeats, d, h_one)
        est = (t_multi - t_one) / max(f.cycles_run - 1, 1)
        per_cycle.append(est)
        print(f"{p:>8} {f.cycles_run:>7} {t_multi:>9.4f} {t_one:>9.4f} {est:>12.3e}")

    if len(ps) >= 2:
        slope = float(np.polyfit(np.log10(ps), np.log10(per_cycle), 1)[0])
        print(f"log-log slope: {slope:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
