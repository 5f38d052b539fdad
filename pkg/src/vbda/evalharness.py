"""Metrics, stratified cross-validation, and the selection-consistency experiment.

Classification error and MCC follow the usual confusion-matrix definitions;
MCC returns 0 when any marginal count is zero (documented convention, the
denominator would vanish).

``kfold_cv`` builds stratified folds by a per-group round-robin over a seeded
shuffle, with the fold counter running on across groups.  That guarantees
both groups appear in every training fold whenever each group has at least
``k`` members, and it degrades gracefully to leave-one-out (k = n), where
folds simply alternate between the groups.

``consistency_experiment`` tracks the soft selection errors
e0 = sum of w over noise variables, e1 = sum of (1 - w) over signal
variables, E = e0 + e1, plus hard false-positive/negative counts at the
selection threshold, as the training size grows.  Curves are recorded both
after a single update cycle and at convergence, since the consistency
guarantee holds for any cycle count >= 1 and the two can differ in practice.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from .core import DataValidationError, Dataset, Hyperparameters
from .rcvb import FitState, fit_vlda, fit_vqda, predict, select_variables
from .simgen import SimSetting, derive_seed, generate

__all__ = [
    "EvalReport",
    "CVReport",
    "ConsistencyCurve",
    "ConsistencyResult",
    "classification_error",
    "selection_confusion",
    "mcc",
    "stratified_folds",
    "kfold_cv",
    "consistency_experiment",
]

_FITTERS = {"vlda": fit_vlda, "vqda": fit_vqda}


def classification_error(pred_labels, true_labels) -> float:
    """Fraction of mismatched labels."""
    pred = np.asarray(pred_labels)
    true = np.asarray(true_labels)
    if pred.shape != true.shape or pred.ndim != 1:
        raise DataValidationError(
            f"label vectors must share one shape, got {pred.shape} vs {true.shape}"
        )
    if pred.size == 0:
        raise DataValidationError("cannot score an empty label vector")
    return float(np.mean(pred.astype(bool) != true.astype(bool)))


def _as_mask(selected, p: int) -> np.ndarray:
    sel = np.asarray(selected)
    if sel.dtype == bool:
        if sel.shape != (p,):
            raise DataValidationError(f"selection mask must have shape ({p},)")
        return sel
    mask = np.zeros(p, dtype=bool)
    if sel.size:
        idx = sel.astype(int)
        if idx.min() < 0 or idx.max() >= p:
            raise DataValidationError("selected indices out of range")
        mask[idx] = True
    return mask


def selection_confusion(selected, true_mask):
    """(TP, TN, FP, FN) of a selected set against the true signal mask."""
    truth = np.asarray(true_mask, dtype=bool)
    mask = _as_mask(selected, truth.size)
    tp = int(np.sum(mask & truth))
    tn = int(np.sum(~mask & ~truth))
    fp = int(np.sum(mask & ~truth))
    fn = int(np.sum(~mask & truth))
    return tp, tn, fp, fn


def mcc(selected, true_mask) -> float:
    """Matthews correlation of a selected variable set; 0 if any marginal is empty."""
    tp, tn, fp, fn = selection_confusion(selected, true_mask)
    denom2 = float(tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom2 == 0.0:
        return 0.0
    return (tp * tn - fp * fn) / np.sqrt(denom2)


@dataclass(frozen=True)
class EvalReport:
    """Per-repetition record: classification counts plus optional selection
    quality (selection fields stay None when the ground truth is unknown)."""

    m: int
    misclassified: int
    error: float
    mcc: float | None = None
    tp: int | None = None
    tn: int | None = None
    fp: int | None = None
    fn: int | None = None
    fit_seconds: float = 0.0
    predict_seconds: float = 0.0


@dataclass(frozen=True)
class CVReport:
    """Cross-validation outcome: one EvalReport per repetition."""

    model: str
    k: int
    reps: tuple[EvalReport, ...]

    @property
    def misclassified(self) -> np.ndarray:
        return np.array([r.misclassified for r in self.reps])

    @property
    def errors(self) -> np.ndarray:
        return np.array([r.error for r in self.reps])


def stratified_folds(y, k: int, rng: np.random.Generator) -> np.ndarray:
    """Fold index per observation: shuffled round-robin within each group,
    the counter continuing across groups so all k folds fill evenly."""
    y = np.asarray(y)
    n = y.size
    if not 2 <= k <= n:
        raise DataValidationError(f"k must lie in [2, n={n}], got {k}")
    folds = np.empty(n, dtype=int)
    counter = 0
    for group in (0, 1):
        idx = np.flatnonzero(y == group)
        idx = rng.permutation(idx)
        for i in idx:
            folds[i] = counter % k
            counter += 1
    return folds


def kfold_cv(
    d: Dataset,
    k: int,
    reps: int = 1,
    model: str = "vlda",
    h: Hyperparameters | None = None,
    seed: int = 0,
    gamma_true=None,
    coupled: bool = False,
) -> CVReport:
    """Repeated stratified k-fold CV; per repetition, misclassifications are
    summed across the k held-out folds.  Deterministic given the seed."""
    if model not in _FITTERS:
        raise DataValidationError(f"model must be one of {sorted(_FITTERS)}, got {model!r}")
    if reps < 1:
        raise DataValidationError("reps must be >= 1")
    d.validate_training()
    h = h or Hyperparameters()
    fitter = _FITTERS[model]
    truth = None if gamma_true is None else np.asarray(gamma_true, dtype=bool)

    reports = []
    for rep in range(reps):
        rng = np.random.default_rng(derive_seed(seed, rep))
        folds = stratified_folds(d.y, k, rng)
        total_wrong = 0
        fit_sec = predict_sec = 0.0
        confusion = np.zeros(4, dtype=float)
        for fold in range(k):
            test_idx = np.flatnonzero(folds == fold)
            train_idx = np.flatnonzero(folds != fold)
            train = Dataset(d.X[train_idx], d.y[train_idx], columns=d.columns)
            train.validate_training()
            t0 = time.perf_counter()
            f = fitter(train, h)
            t1 = time.perf_counter()
            pred = predict(f, d.X[test_idx], h, coupled=coupled)
            t2 = time.perf_counter()
            fit_sec += t1 - t0
            predict_sec += t2 - t1
            total_wrong += int(np.sum(pred.labels != d.y[test_idx].astype(bool)))
            if truth is not None:
                confusion += selection_confusion(select_variables(f, h.c_w), truth)
        err = total_wrong / d.n
        if truth is None:
            rep_mcc = tp = tn = fp = fn = None
        else:
            tp, tn, fp, fn = (confusion / k).tolist()
            denom2 = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
            rep_mcc = 0.0 if denom2 == 0 else (tp * tn - fp * fn) / np.sqrt(denom2)
        reports.append(
            EvalReport(
                m=d.n,
                misclassified=total_wrong,
                error=err,
                mcc=rep_mcc,
                tp=tp,
                tn=tn,
                fp=fp,
                fn=fn,
                fit_seconds=fit_sec,
                predict_seconds=predict_sec,
            )
        )
    return CVReport(model=model, k=k, reps=tuple(reports))


@dataclass(frozen=True)
class ConsistencyCurve:
    """Soft and hard selection errors per (training size, replicate)."""

    ns: tuple[int, ...]
    E: np.ndarray  # (len(ns), reps)
    e0: np.ndarray
    e1: np.ndarray
    fp: np.ndarray
    fn: np.ndarray

    def median(self, field: str) -> np.ndarray:
        return np.median(getattr(self, field), axis=1)


@dataclass(frozen=True)
class ConsistencyResult:
    setting: SimSetting
    model: str
    reps: int
    at_tau1: ConsistencyCurve
    at_convergence: ConsistencyCurve


def consistency_experiment(
    setting: SimSetting,
    ns,
    reps: int,
    h: Hyperparameters | None = None,
    seed: int = 0,
    model: str = "vlda",
) -> ConsistencyResult:
    """Fit fresh replicates of ``setting`` at each training size in ``ns`` and
    record the selection-error curves after one cycle and at convergence."""
    ns = tuple(int(n) for n in ns)
    if any(b <= a for a, b in zip(ns, ns[1:])) or not ns:
        raise DataValidationError("ns must be a nonempty strictly increasing sequence")
    if reps < 1:
        raise DataValidationError("reps must be >= 1")
    if model not in _FITTERS:
        raise DataValidationError(f"model must be one of {sorted(_FITTERS)}, got {model!r}")
    h = h or Hyperparameters()
    h_tau1 = replace(h, max_cycles=1)
    fitter = _FITTERS[model]

    shape = (len(ns), reps)
    raw = {tag: {f: np.zeros(shape) for f in ("E", "e0", "e1", "fp", "fn")}
           for tag in ("tau1", "conv")}
    for i, n in enumerate(ns):
        for rep in range(reps):
            s = replace(setting, n_train=n, n_valid=0, n_test=0,
                        seed=derive_seed(seed, i, rep))
            r = generate(s)
            truth = r.gamma_true
            for tag, hp in (("tau1", h_tau1), ("conv", h)):
                f = fitter(r.train, hp)
                w = f.w
                e0 = float(w[~truth].sum())
                e1 = float((1.0 - w[truth]).sum())
                sel = w > h.c_w
                raw[tag]["e0"][i, rep] = e0
                raw[tag]["e1"][i, rep] = e1
                raw[tag]["E"][i, rep] = e0 + e1
                raw[tag]["fp"][i, rep] = int(sel[~truth].sum())
                raw[tag]["fn"][i, rep] = int((~sel[truth]).sum())

    def curve(tag):
        return ConsistencyCurve(ns=ns, **raw[tag])

    return ConsistencyResult(
        setting=setting,
        model=model,
        reps=reps,
        at_tau1=curve("tau1"),
        at_convergence=curve("conv"),
    )
