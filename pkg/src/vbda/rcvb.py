"""Batch variational updates for selection probabilities and classification.

Fitting maximizes a mean-field approximation q(gamma) = prod_j Bern(w_j) in
which all continuous parameters have been integrated out analytically under
diffuse priors.  Each cycle updates every w_j from the previous cycle's
vector (batch semantics, double-buffered), so within a cycle the updates are
order-independent and embarrassingly parallel.  The per-variable likelihood
ratio statistics are constants of the data and are computed once before
iterating; each cycle therefore costs O(p).

The update has the common structure

    w_j <- expit[ log(a_gamma + S_-j) - log(b_gamma + p - S_-j - 1)
                  + offset_j ],

with S_-j the sum of the other current selection probabilities.  The two
model variants differ only in offset_j:

* linear (VLDA):     -(1/2) log(n+1) + (1/2) lambda_lda_j
* quadratic (VQDA):  (1/2) log(n1 n0 / 2) + xi(n1/2) + xi(n0/2) - xi(n/2)
                     - (3/2) log(n+1) + (1/2) lambda_qda_j

Classification plugs the converged w into a naive-Bayes discriminant,
downweighting each variable by its selection probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .core import (
    DataValidationError,
    Dataset,
    Hyperparameters,
    VariableStats,
    compute_stats,
    expit,
    lambda_lrt_lda,
    lambda_lrt_qda,
    log_b_gamma,
    log_gaussian_density,
    xi,
)

__all__ = [
    "FitState",
    "Prediction",
    "fit_vlda",
    "fit_vqda",
    "predict",
    "predict_vlda",
    "predict_vqda",
    "predict_coupled_vlda",
    "select_variables",
]

MODELS = ("vlda", "vqda")


@dataclass(frozen=True)
class FitState:
    """Converged (or cycle-limited) selection probabilities plus snapshots.

    ``w`` holds the variational probability that each variable is
    discriminative.  ``final_delta`` is the last squared-norm change
    ||w(t) - w(t-1)||^2; ``converged`` means it reached eps within
    max_cycles.  The statistics and hyperparameters used for the fit are
    snapshotted so prediction needs no access to the training data.
    """

    model: str
    w: np.ndarray
    cycles_run: int
    converged: bool
    final_delta: float
    stats: VariableStats
    hyper: Hyperparameters
    columns: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise DataValidationError(f"unknown model {self.model!r}")
        w = np.asarray(self.w, dtype=np.float64)
        if w.ndim != 1 or w.shape[0] != self.stats.p:
            raise DataValidationError(
                f"w must be a length-{self.stats.p} vector, got shape {w.shape}"
            )
        if not np.all((w >= 0.0) & (w <= 1.0)):
            raise DataValidationError("w entries must lie in [0, 1]")
        if self.columns is not None and len(self.columns) != w.shape[0]:
            raise DataValidationError("columns length does not match w")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def p(self) -> int:
        return self.w.shape[0]


@dataclass(frozen=True)
class Prediction:
    """Per-observation group-1 probabilities and thresholded labels.

    ``score`` is the argument handed to expit (prior odds plus discriminant),
    kept for diagnostics and threshold sweeps.  For the coupled update,
    ``converged``/``iterations`` report the fixed-point iteration outcome;
    the one-shot rules set them to True/1.
    """

    y_tilde: np.ndarray
    labels: np.ndarray
    score: np.ndarray
    converged: bool = True
    iterations: int = 1


def _log_inclusion_odds(log_bg: float, p: int, a_gamma: float, s_minus: np.ndarray):
    # log(a_gamma + S_-j) - log(b_gamma + p - S_-j - 1), with the second log
    # assembled by log-sum-exp because b_gamma itself may overflow.  The
    # residual count p - S_-j - 1 is clipped at 0: it is nonnegative in exact
    # arithmetic and can only dip below through rounding of S_-j.
    rest = np.maximum(p - s_minus - 1.0, 0.0)
    with np.errstate(divide="ignore"):
        log_denom = np.logaddexp(log_bg, np.log(rest))
    return np.log(a_gamma + s_minus) - log_denom


def _eta_offset(model: str, s: VariableStats, h: Hyperparameters) -> np.ndarray:
    n, n1, n0 = s.n, s.n1, s.n0
    if model == "vlda":
        lam = lambda_lrt_lda(s, n)
        return -0.5 * math.log(n + 1.0) + 0.5 * lam
    lam = lambda_lrt_qda(s, n, n1, n0)
    const = (
        0.5 * math.log(n1 * n0 / 2.0)
        + xi(n1 / 2.0)
        + xi(n0 / 2.0)
        - xi(n / 2.0)
        - 1.5 * math.log(n + 1.0)
    )
    return const + 0.5 * lam


def _fit(d: Dataset, h: Hyperparameters, model: str) -> FitState:
    d.validate_training()
    stats = compute_stats(d, h.variance_floor)
    offset = _eta_offset(model, stats, h)
    log_bg = log_b_gamma(d.n, d.p, h.r, h.kappa)
    p = d.p
    w = np.full(p, float(h.w_init))
    delta = math.inf
    cycles = 0
    for _ in range(h.max_cycles):
        s_minus = w.sum() - w
        eta = _log_inclusion_odds(log_bg, p, h.a_gamma, s_minus) + offset
        w_next = expit(eta)
        delta = float(np.sum((w_next - w) ** 2))
        w = w_next
        cycles += 1
        if delta <= h.eps:
            break
    return FitState(
        model=model,
        w=w,
        cycles_run=cycles,
        converged=delta <= h.eps,
        final_delta=delta,
        stats=stats,
        hyper=h,
        columns=d.columns,
    )


def fit_vlda(d: Dataset, h: Hyperparameters | None = None) -> FitState:
    """Fit selection probabilities under the shared-variance (linear) model.

    Iterates batch updates of all w_j until ||w(t) - w(t-1)||^2 <= eps or
    max_cycles is hit; the returned state is flagged rather than raising on
    non-convergence.  Per-variable statistics never change across cycles, so
    each cycle is O(p).
    """
    return _fit(d, h or Hyperparameters(), "vlda")


def fit_vqda(d: Dataset, h: Hyperparameters | None = None) -> FitState:
    """Fit selection probabilities under the separate-variance (quadratic) model.

    Same iteration as :func:`fit_vlda` with the quadratic offset.  The
    default a_gamma = 1 reproduces the hard-coded log(1 + S_-j) numerator of
    the reference update; other a_gamma values generalize it.
    """
    return _fit(d, h or Hyperparameters(), "vqda")


def _check_new_matrix(f: FitState, x_new) -> np.ndarray:
    X = x_new.X if isinstance(x_new, Dataset) else np.asarray(x_new, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != f.p:
        raise DataValidationError(
            f"new observations have {X.shape[-1] if X.ndim else 0} columns, "
            f"fit expects {f.p}"
        )
    if not np.isfinite(X).all():
        raise DataValidationError("new observations contain non-finite values")
    return X


def _lda_discriminant(s: VariableStats, w: np.ndarray, X: np.ndarray) -> np.ndarray:
    # (mu1 - mu0)^T W Sigma^{-1} (x - (mu0 + mu1)/2), with W = diag(w) and
    # Sigma = diag(var_pooled).  Oriented so a point at the group-1 centroid
    # scores positive.
    diff = s.mu1_hat - s.mu0_hat
    mid = 0.5 * (s.mu1_hat + s.mu0_hat)
    weight = w * diff / s.var_pooled
    return (X - mid) @ weight


def predict_vlda(
    f: FitState, x_new, h: Hyperparameters | None = None
) -> Prediction:
    """Classify new observations under the linear model, one at a time.

    y_tilde_i = expit[ log((n1 + a_y) / (n0 + b_y))
                       + (1 + 1/n) * LDA(x_i) ],

    where LDA is the selection-weighted naive-Bayes discriminant
    (mu1 - mu0)^T W Sigma^{-1} (x - (mu0 + mu1)/2).  With W = I and
    a_y = b_y = 0 the hard labels coincide with the frequentist
    naive-Bayes linear rule.  Observations are independent here; see
    :func:`predict_coupled_vlda` for the jointly-updated variant.
    """
    h = h or f.hyper
    X = _check_new_matrix(f, x_new)
    s = f.stats
    prior_odds = math.log((s.n1 + h.a_y) / (s.n0 + h.b_y))
    score = prior_odds + (1.0 + 1.0 / s.n) * _lda_discriminant(s, f.w, X)
    y_tilde = expit(score)
    return Prediction(
        y_tilde=y_tilde,
        labels=(y_tilde > h.c_y).astype(np.int8),
        score=score,
    )


def predict_vqda(
    f: FitState, x_new, h: Hyperparameters | None = None
) -> Prediction:
    """Classify new observations under the quadratic model.

    y_tilde_i = expit[ log(n1/n0)
                       + (1^T w) * (G(n1) - G(n0))
                       + (1/2) w^T {log phi(x; mu1, var1)
                                    - log phi(x; mu0, var0)} ],

    with G(k) = log Gamma((k+1)/2) - log Gamma(k/2) and phi the element-wise
    Gaussian density under each group's own mean and variance.  The prior
    odds term uses the raw group counts (no a_y/b_y), matching the reference
    form of this rule; for n1 == n0 and a fully symmetric input the argument
    collapses to 0 and y_tilde = 0.5.
    """
    h = h or f.hyper
    X = _check_new_matrix(f, x_new)
    s = f.stats
    g1 = float(gammaln((s.n1 + 1) / 2.0) - gammaln(s.n1 / 2.0))
    g0 = float(gammaln((s.n0 + 1) / 2.0) - gammaln(s.n0 / 2.0))
    loglik_diff = log_gaussian_density(X, s.mu1_hat, s.var1) - log_gaussian_density(
        X, s.mu0_hat, s.var0
    )
    score = (
        math.log(s.n1 / s.n0)
        + f.w.sum() * (g1 - g0)
        + 0.5 * (loglik_diff @ f.w)
    )
    y_tilde = expit(score)
    return Prediction(
        y_tilde=y_tilde,
        labels=(y_tilde > h.c_y).astype(np.int8),
        score=score,
    )


def predict_coupled_vlda(
    f: FitState, x_new, h: Hyperparameters | None = None
) -> Prediction:
    """Classify m observations jointly, sharing label mass through the prior.

    The m unknown labels enter one Beta-Bernoulli posterior together, so each
    probability conditions on the expected labels of the others:

        y_tilde_i = expit[ log( (a_y + n1 + s_i) /
                                (b_y + n0 + (m-1) - s_i) )
                           + (1 + 1/n) * LDA(x_i) ],
        s_i = sum_{i' != i} y_tilde_{i'}.

    All m probabilities are updated as a batch from the previous iterate
    until the squared change is <= eps (non-convergence is flagged, not
    raised).  For m = 1 the fixed point is exactly the one-shot rule of
    :func:`predict_vlda`.
    """
    h = h or f.hyper
    X = _check_new_matrix(f, x_new)
    s = f.stats
    m = X.shape[0]
    base = (1.0 + 1.0 / s.n) * _lda_discriminant(s, f.w, X)
    y = np.full(m, 0.5)
    converged = False
    iterations = 0
    for _ in range(h.max_cycles):
        s_minus = y.sum() - y
        score = (
            np.log(h.a_y + s.n1 + s_minus)
            - np.log(h.b_y + s.n0 + (m - 1) - s_minus)
            + base
        )
        y_next = expit(score)
        delta = float(np.sum((y_next - y) ** 2))
        y = y_next
        iterations += 1
        if delta <= h.eps:
            converged = True
            break
    s_minus = y.sum() - y
    score = (
        np.log(h.a_y + s.n1 + s_minus)
        - np.log(h.b_y + s.n0 + (m - 1) - s_minus)
        + base
    )
    return Prediction(
        y_tilde=y,
        labels=(y > h.c_y).astype(np.int8),
        score=score,
        converged=converged,
        iterations=iterations,
    )


def predict(
    f: FitState, x_new, h: Hyperparameters | None = None, coupled: bool = False
) -> Prediction:
    """Dispatch to the prediction rule matching the fitted model."""
    if coupled:
        if f.model != "vlda":
            raise DataValidationError("coupled prediction is defined for vlda only")
        return predict_coupled_vlda(f, x_new, h)
    if f.model == "vlda":
        return predict_vlda(f, x_new, h)
    return predict_vqda(f, x_new, h)


def select_variables(f: FitState, c_w: float | None = None) -> np.ndarray:
    """Indices of variables whose selection probability strictly exceeds c_w."""
    threshold = f.hyper.c_w if c_w is None else c_w
    return np.flatnonzero(f.w > threshold)
