#!/usr/bin/env python3
"""Selection-error curves as the training size grows.

Runs the consistency experiment on one simulation setting and prints the
median soft errors (E = mass on noise + missing mass on signal) and hard
FP/FN counts per training size, for the single-cycle and converged fits.
"""

import argparse
import os
import sys

from vbda import Hyperparameters, consistency_experiment, setting_from_index
from vbda.dataio import write_json


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--setting", type=int, default=1)
    ap.add_argument("--n", default="100,400,1600",
                    help="comma-separated training sizes")
    ap.add_argument("--reps", type=int, default=25)
    ap.add_argument("--p", type=int, default=None)
    ap.add_argument("--model", choices=("vlda", "vqda"), default="vlda")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--out-dir", default="consistency_out")
    return ap.parse_args()


def main():
    args = parse_args()
    ns = tuple(int(tok) for tok in args.n.split(",") if tok)
    overrides = {"p": args.p} if args.p is not None else {}
    setting = setting_from_index(args.setting, **overrides)
    result = consistency_experiment(
        setting, ns, args.reps, h=Hyperparameters(), seed=args.seed,
        model=args.model,
    )

    doc = {}
    for tag, curve in (("single-cycle", result.at_tau1),
                       ("converged", result.at_convergence)):
        print(f"{tag}:")
        print(f"  {'n':>6} {'E':>9} {'e0':>9} {'e1':>9} {'FP':>5} {'FN':>5}")
        doc[tag] = {}
        for i, n in enumerate(curve.ns):
            med = {f: float(curve.median(f)[i]) for f in ("E", "e0", "e1", "fp", "fn")}
            doc[tag][str(n)] = med
            print(f"  {n:>6} {med['E']:>9.3f} {med['e0']:>9.3f} "
                  f"{med['e1']:>9.3f} {med['fp']:>5.0f} {med['fn']:>5.0f}")

    os.makedirs(args.out_dir, exist_ok=True)
    write_json(doc, os.path.join(args.out_dir, "consistency_medians.json"))
    print(f"wrote medians -> {args.out_dir}/consistency_medians.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())
