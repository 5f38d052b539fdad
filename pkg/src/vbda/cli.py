"""Command-line front end.

Subcommands: fit, predict, simulate, cv, consistency, oracle.  Every run
writes its data files plus a metadata.json (full config, seed, package
version, wall-clock timing) into --out-dir; fit additionally writes a
diagnostics sidecar (cycle count, final delta, floored variables).  Data
files are deterministic given the flags and seed; only the metadata record
carries timing.  stdout is reserved for human-readable progress.

Exit codes: 0 success, 2 usage error, 3 data/domain error, 4 capacity error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace

import numpy as np

from .core import (
    CapacityError,
    DataValidationError,
    Dataset,
    DomainError,
    Hyperparameters,
)
from .dataio import (
    align_to_columns,
    load_csv,
    load_state,
    prediction_rows,
    save_csv,
    save_state,
    selection_rows,
    write_json,
    write_tsv,
)
from .evalharness import consistency_experiment, kfold_cv
from .oracle import exact_posterior
from .rcvb import fit_vlda, fit_vqda, predict
from .simgen import SimSetting, generate, setting_from_index

__all__ = ["main", "build_parser"]

_HYPER_FLAGS = {
    # flag dest -> Hyperparameters field
    "ay": "a_y",
    "by": "b_y",
    "agamma": "a_gamma",
    "r": "r",
    "kappa": "kappa",
    "cw": "c_w",
    "cy": "c_y",
    "eps": "eps",
    "max_cycles": "max_cycles",
}


def _version() -> str:
    try:
        from importlib.metadata import version

        return version("vbda")
    except Exception:
        return "unknown"


def _add_hyper_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model hyperparameters")
    g.add_argument("--ay", type=float, default=None, help="label prior pseudo-count for group 1")
    g.add_argument("--by", type=float, default=None, help="label prior pseudo-count for group 0")
    g.add_argument("--agamma", type=float, default=None, help="selection prior numerator constant")
    g.add_argument("--r", type=float, default=None, help="penalty exponent (< 1)")
    g.add_argument("--kappa", type=float, default=None, help="penalty growth constant (> 0)")
    g.add_argument("--cw", type=float, default=None, help="selection threshold on w")
    g.add_argument("--cy", type=float, default=None, help="label threshold on y_tilde")
    g.add_argument("--eps", type=float, default=None, help="convergence tolerance on the squared w-step")
    g.add_argument("--max-cycles", type=int, default=None, help="update-cycle cap")


def _hyper_from_args(args, base: Hyperparameters | None = None) -> Hyperparameters:
    base = base or Hyperparameters()
    overrides = {
        field: getattr(args, dest)
        for dest, field in _HYPER_FLAGS.items()
        if getattr(args, dest, None) is not None
    }
    return replace(base, **overrides) if overrides else base


def _out_dir(args) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    return args.out_dir


def _write_metadata(args, out_dir: str, seconds: float, extra: dict | None = None) -> None:
    config = {k: v for k, v in vars(args).items() if k != "func"}
    doc = {
        "command": args.command,
        "config": config,
        "seed": getattr(args, "seed", None),
        "version": _version(),
        "timings": {"seconds": seconds},
    }
    if extra:
        doc.update(extra)
    write_json(doc, os.path.join(out_dir, "metadata.json"))


def _load_training(args) -> Dataset:
    return load_csv(args.data, label_column=args.label)


def cmd_fit(args) -> int:
    t0 = time.perf_counter()
    d = _load_training(args)
    h = _hyper_from_args(args)
    fitter = fit_vlda if args.model == "vlda" else fit_vqda
    f = fitter(d, h)
    out = _out_dir(args)
    save_state(f, os.path.join(out, "fit_state.json"))
    rows = selection_rows(f)
    write_tsv(rows, os.path.join(out, "selection.tsv"), ("variable_id", "w", "selected"))
    write_json(rows, os.path.join(out, "selection.json"))
    names = f.columns or tuple(f"v{j + 1}" for j in range(f.p))
    diagnostics = {
        "cycles_run": f.cycles_run,
        "converged": f.converged,
        "final_delta": f.final_delta,
        "floored_variables": [names[j] for j in np.flatnonzero(f.stats.floored)],
        "selected_count": int(sum(r["selected"] for r in rows)),
    }
    write_json(diagnostics, os.path.join(out, "fit_diagnostics.json"))
    seconds = time.perf_counter() - t0
    diagnostics["fit_seconds"] = seconds
    _write_metadata(args, out, seconds)
    if not f.converged:
        print(
            f"warning: stopped after {f.cycles_run} cycles with squared step "
            f"{f.final_delta:.3e} > eps; fit not converged",
            file=sys.stderr,
        )
    print(
        f"fit {args.model}: p={f.p}, n={f.stats.n}, cycles={f.cycles_run}, "
        f"selected={diagnostics['selected_count']} -> {out}"
    )
    return 0


def cmd_predict(args) -> int:
    t0 = time.perf_counter()
    f = load_state(args.state)
    d = load_csv(args.data, label_column=args.label)
    aligned = align_to_columns(d, f.columns)
    h = _hyper_from_args(args, base=f.hyper)
    pred = predict(f, aligned.X, h, coupled=args.coupled)
    out = _out_dir(args)
    rows = prediction_rows(pred)
    write_tsv(rows, os.path.join(out, "predictions.tsv"), ("row_id", "y_tilde", "label"))
    write_json(rows, os.path.join(out, "predictions.json"))
    _write_metadata(args, out, time.perf_counter() - t0)
    if not pred.converged:
        print("warning: coupled label updates did not converge", file=sys.stderr)
    print(f"predicted {len(rows)} rows with {f.model} -> {out}")
    return 0


def _setting_from_args(args) -> SimSetting:
    overrides = {"seed": args.seed}
    if args.p is not None:
        overrides["p"] = args.p
    if args.n is not None:
        overrides["n_train"] = int(args.n)
    if args.n_valid is not None:
        overrides["n_valid"] = args.n_valid
    if args.n_test is not None:
        overrides["n_test"] = args.n_test
    if args.delta_sigma is not None:
        overrides["delta_sigma"] = args.delta_sigma
    return setting_from_index(args.setting, **overrides)


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    s = _setting_from_args(args)
    r = generate(s)
    out = _out_dir(args)
    save_csv(r.train, os.path.join(out, "train.csv"))
    for name, part in (("valid", r.valid), ("test", r.test)):
        if part is not None:
            save_csv(part, os.path.join(out, f"{name}.csv"))
    write_json(
        {
            "signal_indices": np.flatnonzero(r.gamma_true).tolist(),
            "mu1": r.mu1.tolist(),
            "sigma0": r.sigma0.tolist(),
        },
        os.path.join(out, "truth.json"),
    )
    _write_metadata(args, out, time.perf_counter() - t0)
    print(
        f"simulated setting {args.setting}: p={s.p}, n_train={s.n_train}, "
        f"n_valid={s.n_valid}, n_test={s.n_test} -> {out}"
    )
    return 0


def cmd_cv(args) -> int:
    t0 = time.perf_counter()
    d = _load_training(args)
    h = _hyper_from_args(args)
    report = kfold_cv(
        d, args.k, reps=args.reps, model=args.model, h=h, seed=args.seed,
        coupled=args.coupled,
    )
    out = _out_dir(args)
    rows = [
        {
            "rep": i,
            "misclassified": r.misclassified,
            "error": r.error,
            "fit_seconds": r.fit_seconds,
            "predict_seconds": r.predict_seconds,
        }
        for i, r in enumerate(report.reps)
    ]
    write_tsv(rows, os.path.join(out, "cv_report.tsv"),
              ("rep", "misclassified", "error", "fit_seconds", "predict_seconds"))
    write_json(rows, os.path.join(out, "cv_report.json"))
    _write_metadata(args, out, time.perf_counter() - t0)
    med = float(np.median(report.errors))
    print(f"cv {args.model}: k={args.k}, reps={args.reps}, median error {med:.4f} -> {out}")
    return 0


def cmd_consistency(args) -> int:
    t0 = time.perf_counter()
    try:
        ns = tuple(int(tok) for tok in str(args.n or "100,400,1600").split(",") if tok)
    except ValueError:
        raise DataValidationError(f"--n must be a comma-separated integer list, got {args.n!r}")
    s = setting_from_index(args.setting, **({"p": args.p} if args.p is not None else {}))
    h = _hyper_from_args(args)
    result = consistency_experiment(s, ns, args.reps, h=h, seed=args.seed, model=args.model)
    out = _out_dir(args)
    rows = []
    for tag, curve in (("tau1", result.at_tau1), ("converged", result.at_convergence)):
        for i, n in enumerate(curve.ns):
            for rep in range(args.reps):
                rows.append(
                    {
                        "variant": tag,
                        "n": n,
                        "rep": rep,
                        "E": float(curve.E[i, rep]),
                        "e0": float(curve.e0[i, rep]),
                        "e1": float(curve.e1[i, rep]),
                        "fp": int(curve.fp[i, rep]),
                        "fn": int(curve.fn[i, rep]),
                    }
                )
    write_tsv(rows, os.path.join(out, "consistency.tsv"),
              ("variant", "n", "rep", "E", "e0", "e1", "fp", "fn"))
    medians = {
        tag: {
            str(n): {f: float(curve.median(f)[i]) for f in ("E", "e0", "e1", "fp", "fn")}
            for i, n in enumerate(curve.ns)
        }
        for tag, curve in (("tau1", result.at_tau1), ("converged", result.at_convergence))
    }
    write_json(medians, os.path.join(out, "consistency.json"))
    _write_metadata(args, out, time.perf_counter() - t0)
    med_e = medians["converged"][str(ns[-1])]["E"]
    print(f"consistency {args.model}: ns={ns}, reps={args.reps}, "
          f"median E at n={ns[-1]}: {med_e:.3f} -> {out}")
    return 0


def cmd_oracle(args) -> int:
    t0 = time.perf_counter()
    d = _load_training(args)
    new = load_csv(args.new)
    if new.X.shape[0] != 1:
        raise DataValidationError(
            f"--new must contain exactly one data row, got {new.X.shape[0]}"
        )
    aligned = align_to_columns(new, d.columns)
    h = _hyper_from_args(args)
    ep = exact_posterior(d, aligned.X[0], h, model=args.model)
    out = _out_dir(args)
    names = d.columns or tuple(f"v{j + 1}" for j in range(d.p))
    rows = [
        {"variable_id": names[j], "marginal": float(ep.gamma_marginals[j])}
        for j in range(d.p)
    ]
    write_tsv(rows, os.path.join(out, "oracle.tsv"), ("variable_id", "marginal"))
    write_json(
        {
            "model": args.model,
            "gamma_marginals": ep.gamma_marginals.tolist(),
            "y_marginal": float(ep.y_marginal),
            "log_marginal": float(ep.log_marginal),
            "configurations": int(ep.gammas.shape[0]),
        },
        os.path.join(out, "oracle.json"),
    )
    _write_metadata(args, out, time.perf_counter() - t0)
    print(f"enumerated {ep.gammas.shape[0]} configurations over p={d.p} -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vbda",
        description="Variational discriminant analysis with variable selection.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, model=True):
        p.add_argument("--seed", type=int, default=0, help="base RNG seed")
        p.add_argument("--threads", type=int, default=1,
                       help="upper bound on worker threads (vectorized code path uses one)")
        p.add_argument("--out-dir", default=".", help="directory for outputs")
        if model:
            p.add_argument("--model", choices=("vlda", "vqda"), default="vlda")
        _add_hyper_flags(p)

    p_fit = sub.add_parser("fit", help="fit selection probabilities on a labeled CSV")
    p_fit.add_argument("--data", required=True, help="training CSV path")
    p_fit.add_argument("--label", default="label", help="label column name")
    common(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_pred = sub.add_parser("predict", help="score new rows with a saved fit state")
    p_pred.add_argument("--state", required=True, help="fit_state.json path")
    p_pred.add_argument("--data", required=True, help="CSV of rows to score")
    p_pred.add_argument("--label", default=None,
                        help="label column to ignore in --data, if present")
    p_pred.add_argument("--coupled", action="store_true",
                        help="couple the scored rows through the shared label-frequency posterior")
    common(p_pred, model=False)
    p_pred.set_defaults(func=cmd_predict)

    p_sim = sub.add_parser("simulate", help="draw one synthetic replicate")
    p_sim.add_argument("--setting", type=int, required=True, help="setting index 1..16")
    p_sim.add_argument("--n", default=None, help="training rows")
    p_sim.add_argument("--p", type=int, default=None, help="number of variables")
    p_sim.add_argument("--n-valid", type=int, default=None)
    p_sim.add_argument("--n-test", type=int, default=None)
    p_sim.add_argument("--delta-sigma", type=float, default=None,
                       help="extra group-0 SD on signal variables")
    common(p_sim, model=False)
    p_sim.set_defaults(func=cmd_simulate)

    p_cv = sub.add_parser("cv", help="repeated stratified k-fold cross-validation")
    p_cv.add_argument("--data", required=True)
    p_cv.add_argument("--label", default="label")
    p_cv.add_argument("--k", type=int, default=5)
    p_cv.add_argument("--reps", type=int, default=1)
    p_cv.add_argument("--coupled", action="store_true")
    common(p_cv)
    p_cv.set_defaults(func=cmd_cv)

    p_con = sub.add_parser("consistency", help="selection-error curves over growing n")
    p_con.add_argument("--setting", type=int, default=1)
    p_con.add_argument("--n", default="100,400,1600",
                       help="comma-separated training sizes")
    p_con.add_argument("--p", type=int, default=None)
    p_con.add_argument("--reps", type=int, default=25)
    common(p_con)
    p_con.set_defaults(func=cmd_consistency)

    p_or = sub.add_parser("oracle", help="exact posterior by enumeration (small p)")
    p_or.add_argument("--data", required=True, help="training CSV path")
    p_or.add_argument("--label", default="label")
    p_or.add_argument("--new", required=True, help="CSV with exactly one unlabeled row")
    common(p_or)
    p_or.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (DataValidationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
