"""Shared domain types, per-variable Gaussian statistics, and special functions.

Both classifiers in this package test, for every variable j, a null model
(one mean, one variance) against a group-structured alternative: separate
group means with a shared variance for the linear variant (VLDA), separate
group means and variances for the quadratic variant (VQDA).  Everything
downstream -- selection probabilities, classification rules, the exact
enumeration oracle -- is assembled from the per-variable maximum likelihood
estimates plus two penalty ingredients defined here: the global sparsity
constant b_gamma and the Stirling-corrected log-gamma term xi.

Conventions used throughout:

* All variance MLEs use denominators n, n1, n0 (not the unbiased n-1 forms).
* Variances are floored at ``variance_floor`` so constant columns degrade
  gracefully instead of producing infinities; a per-variable flag records
  where flooring happened.
* b_gamma overflows any machine real for large n, so it is only ever carried
  as log(b_gamma) and combined with other terms through log-sum-exp.

All functions here are pure and safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, gammaln

__all__ = [
    "CoreError",
    "DataValidationError",
    "DomainError",
    "CapacityError",
    "Dataset",
    "Hyperparameters",
    "VariableStats",
    "compute_stats",
    "compute_stats_with_new",
    "log_b_gamma",
    "xi",
    "lambda_lrt_lda",
    "lambda_lrt_qda",
    "expit",
    "log_gaussian_density",
]


class CoreError(Exception):
    """Base class for all errors raised by this package."""


class DataValidationError(CoreError, ValueError):
    """Input data violates a documented precondition."""


class DomainError(CoreError, ValueError):
    """A scalar argument lies outside the mathematical domain of a function."""


class CapacityError(CoreError, ValueError):
    """The request exceeds a hard size limit (e.g. exact enumeration width)."""


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise DataValidationError(f"X must be 2-dimensional, got ndim={X.ndim}")
    return X


@dataclass(frozen=True)
class Dataset:
    """An n-by-p data matrix with optional binary group labels.

    ``y`` is None for prediction-only data.  Labels must be exactly 0 or 1.
    ``columns`` carries variable names for alignment at prediction time;
    when absent, positional alignment is assumed.
    """

    X: np.ndarray
    y: np.ndarray | None = None
    columns: tuple[str, ...] | None = None
    label_name: str = "label"

    def __post_init__(self):
        X = _as_matrix(self.X)
        if X.shape[1] < 1:
            raise DataValidationError("dataset needs at least one variable (p >= 1)")
        if not np.isfinite(X).all():
            bad = np.argwhere(~np.isfinite(X))[0]
            raise DataValidationError(
                f"non-finite value in X at row {bad[0]}, column {bad[1]}"
            )
        X.setflags(write=False)
        object.__setattr__(self, "X", X)
        if self.y is not None:
            y = np.asarray(self.y)
            if y.shape != (X.shape[0],):
                raise DataValidationError(
                    f"y has shape {y.shape}, expected ({X.shape[0]},)"
                )
            if not np.isin(y, (0, 1)).all():
                raise DataValidationError("labels must all be 0 or 1")
            y = y.astype(np.int8)
            y.setflags(write=False)
            object.__setattr__(self, "y", y)
        if self.columns is not None:
            cols = tuple(str(c) for c in self.columns)
            if len(cols) != X.shape[1]:
                raise DataValidationError(
                    f"{len(cols)} column names for {X.shape[1]} columns"
                )
            object.__setattr__(self, "columns", cols)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def n1(self) -> int:
        self._require_labels()
        return int(self.y.sum())

    @property
    def n0(self) -> int:
        return self.n - self.n1

    def _require_labels(self):
        if self.y is None:
            raise DataValidationError("operation requires a labeled dataset")

    def validate_training(self) -> None:
        """Check the invariants required of a training set.

        Each group needs its own variance estimate, hence at least two
        observations per group and four overall.
        """
        self._require_labels()
        if self.n < 4:
            raise DataValidationError(f"training needs n >= 4, got n={self.n}")
        if self.n1 < 2 or self.n0 < 2:
            raise DataValidationError(
                f"each group needs >= 2 observations, got n1={self.n1}, n0={self.n0}"
            )


@dataclass(frozen=True)
class Hyperparameters:
    """Prior constants, thresholds, and iteration controls.

    a_y, b_y parameterize the Beta prior on the group-1 probability; they
    may be zero, which drops the prior odds adjustment from classification
    (the frequentist-concordance setting).  a_gamma and the derived b_gamma
    (see :func:`log_b_gamma`) parameterize the Beta prior on the inclusion
    probability; r < 1 and kappa > 0 control how fast b_gamma grows with n.
    c_w and c_y are the selection and classification thresholds.  eps bounds
    the squared norm of successive selection-probability updates; raising a
    variance below variance_floor up to it keeps every log finite.
    """

    a_y: float = 1.0
    b_y: float = 1.0
    a_gamma: float = 1.0
    r: float = 0.98
    kappa: float = 1e-3
    c_w: float = 0.5
    c_y: float = 0.5
    eps: float = 1e-6
    max_cycles: int = 100
    variance_floor: float = 1e-12
    w_init: float = 0.5

    def __post_init__(self):
        if self.a_y < 0 or self.b_y < 0:
            raise DomainError("a_y and b_y must be nonnegative")
        if self.a_gamma <= 0:
            raise DomainError("a_gamma must be positive")
        if not self.r < 1:
            raise DomainError(f"r must be < 1, got {self.r}")
        if not self.kappa > 0:
            raise DomainError(f"kappa must be positive, got {self.kappa}")
        for name in ("c_w", "c_y"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise DomainError(f"{name} must lie in (0, 1), got {v}")
        if not self.eps > 0:
            raise DomainError(f"eps must be positive, got {self.eps}")
        if self.max_cycles < 1:
            raise DomainError("max_cycles must be a positive integer")
        if not self.variance_floor > 0:
            raise DomainError("variance_floor must be positive")
        if not 0.0 <= self.w_init <= 1.0:
            raise DomainError(f"w_init must lie in [0, 1], got {self.w_init}")


@dataclass(frozen=True)
class VariableStats:
    """Per-variable Gaussian MLEs for the null and alternative models.

    mu_hat / var_total describe the one-group null model; mu1_hat, mu0_hat
    are the group means; var_pooled is the shared-variance alternative
    (linear variant); var1 / var0 are the group variances (quadratic
    variant).  ``floored`` flags variables where any variance was raised to
    the floor.  n, n1, n0 are the observation counts the denominators used.
    """

    mu_hat: np.ndarray
    mu1_hat: np.ndarray
    mu0_hat: np.ndarray
    var_total: np.ndarray
    var_pooled: np.ndarray
    var1: np.ndarray
    var0: np.ndarray
    floored: np.ndarray
    n: int
    n1: int
    n0: int

    @property
    def p(self) -> int:
        return self.mu_hat.shape[0]


def _stats_from_arrays(X: np.ndarray, y: np.ndarray, variance_floor: float) -> VariableStats:
    # Denominators are deliberately n, n1, n0 -- MLE convention.
    n = X.shape[0]
    yf = y.astype(np.float64)
    n1 = int(round(float(yf.sum())))
    n0 = n - n1
    mu1 = (yf @ X) / n1
    mu0 = ((1.0 - yf) @ X) / n0
    mu = X.mean(axis=0)
    d1 = X - mu1
    d0 = X - mu0
    ss1 = yf @ (d1 * d1)
    ss0 = (1.0 - yf) @ (d0 * d0)
    var1 = ss1 / n1
    var0 = ss0 / n0
    var_pooled = (ss1 + ss0) / n
    dm = X - mu
    var_total = (dm * dm).sum(axis=0) / n
    floored = (
        (var1 < variance_floor)
        | (var0 < variance_floor)
        | (var_pooled < variance_floor)
        | (var_total < variance_floor)
    )
    return VariableStats(
        mu_hat=mu,
        mu1_hat=mu1,
        mu0_hat=mu0,
        var_total=np.maximum(var_total, variance_floor),
        var_pooled=np.maximum(var_pooled, variance_floor),
        var1=np.maximum(var1, variance_floor),
        var0=np.maximum(var0, variance_floor),
        floored=floored,
        n=n,
        n1=n1,
        n0=n0,
    )


def compute_stats(d: Dataset, variance_floor: float = 1e-12) -> VariableStats:
    """Training-only per-variable MLEs.

    These are the large-n (Taylor) forms used inside the selection updates:
    group means (1/n_k) sum over group k, pooled alternative variance
    (SS1 + SS0)/n, null variance (1/n)||x_j - mu_hat||^2, and group
    variances SS_k/n_k.  The identity
    n * var_pooled == n1 * var1 + n0 * var0 holds exactly before flooring.
    """
    d.validate_training()
    return _stats_from_arrays(d.X, d.y, variance_floor)


def compute_stats_with_new(
    d: Dataset,
    x_new: np.ndarray,
    y_new: int,
    variance_floor: float = 1e-12,
) -> VariableStats:
    """Exact MLEs over the training data augmented with one new labeled point.

    Denominators become n+1, n1+y_new, n0+1-y_new.  Used by the exact
    enumeration oracle, where the statistics genuinely depend on the
    hypothesised label of the new observation.
    """
    d.validate_training()
    if y_new not in (0, 1):
        raise DataValidationError(f"y_new must be 0 or 1, got {y_new!r}")
    x_new = np.asarray(x_new, dtype=np.float64).reshape(-1)
    if x_new.shape[0] != d.p:
        raise DataValidationError(
            f"x_new has {x_new.shape[0]} entries, expected p={d.p}"
        )
    if not np.isfinite(x_new).all():
        raise DataValidationError("x_new contains non-finite values")
    X_aug = np.vstack([d.X, x_new])
    y_aug = np.concatenate([d.y, [y_new]]).astype(np.int8)
    return _stats_from_arrays(X_aug, y_aug, variance_floor)


def log_b_gamma(n: int, p: int, r: float, kappa: float) -> float:
    """log of the global sparsity constant b_gamma.

    b_gamma = p^2 / sqrt(n+1) * exp[kappa * (n+1) / (log(n+1))^r], computed
    entirely in log space:

        log b_gamma = 2 log p - (1/2) log(n+1) + kappa (n+1) / (log(n+1))^r.

    The raw value overflows machine reals for moderate n, so only the log
    form is ever used.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1 (log(n+1) must be nonzero), got {n}")
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if not r < 1:
        raise DomainError(f"r must be < 1, got {r}")
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    log_np1 = math.log(n + 1.0)
    return 2.0 * math.log(p) - 0.5 * log_np1 + kappa * (n + 1.0) / log_np1**r


# Stirling series for xi(x) = log Gamma(x) + x - x log x - (1/2) log(2 pi).
# For x >= _XI_SERIES_CUTOFF the series below is accurate to machine
# precision (next omitted term is 1/(1188 x^9) < 1e-12 at x = 10); below the
# cutoff the direct log-gamma evaluation has no cancellation problem.
_XI_SERIES_CUTOFF = 10.0
_LOG_2PI = math.log(2.0 * math.pi)


def xi(x):
    """Stirling-corrected log-gamma: log Gamma(x) + x - x log x - (1/2) log(2 pi).

    Behaves like -(1/2) log x + 1/(12 x) for large x.  Evaluated through the
    asymptotic series above ``x >= 10`` to avoid the catastrophic
    cancellation of subtracting x log x from log Gamma(x) at large x.
    Accepts scalars or arrays; the domain is x > 0.
    """
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr <= 0) or not np.isfinite(arr).all():
        raise DomainError("xi requires x > 0")
    small = arr < _XI_SERIES_CUTOFF
    out = np.empty_like(arr)
    if small.any():
        xs = arr[small]
        out[small] = gammaln(xs) + xs - xs * np.log(xs) - 0.5 * _LOG_2PI
    if (~small).any():
        xl = arr[~small]
        inv = 1.0 / xl
        inv2 = inv * inv
        out[~small] = (
            -0.5 * np.log(xl)
            + inv * (1.0 / 12.0)
            - inv * inv2 * (1.0 / 360.0)
            + inv * inv2 * inv2 * (1.0 / 1260.0)
            - inv * inv2 * inv2 * inv2 * (1.0 / 1680.0)
        )
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


def lambda_lrt_lda(s: VariableStats, n: int):
    """Per-variable likelihood ratio statistic for the shared-variance test.

    lambda_j = (n+1) * [log var_total_j - log var_pooled_j], where n is the
    number of *training* observations.  With training-only statistics the
    multiplier is n+1 by construction; with statistics that already include
    the new observation (s.n == n+1) the same call yields the exact
    with-new-point statistic.  Nonnegative up to flooring effects.
    """
    return (n + 1.0) * (np.log(s.var_total) - np.log(s.var_pooled))


def lambda_lrt_qda(s: VariableStats, n: int, n1: int, n0: int):
    """Per-variable likelihood ratio statistic for the separate-variance test.

    lambda_j = (n+1) log var_total_j - n1 log var1_j - n0 log var0_j.

    The multipliers are passed explicitly because the two usages differ:
    training-only statistics pair with (n, n1, n0), while exact with-new
    statistics pair with (n, n1 + y_new, n0 + 1 - y_new).
    """
    return (
        (n + 1.0) * np.log(s.var_total)
        - float(n1) * np.log(s.var1)
        - float(n0) * np.log(s.var0)
    )


def log_gaussian_density(x, mu, var):
    """Element-wise log N(x; mu, var) = -(1/2) log(2 pi var) - (x-mu)^2/(2 var)."""
    x = np.asarray(x, dtype=np.float64)
    var = np.asarray(var, dtype=np.float64)
    return -0.5 * np.log(2.0 * math.pi * var) - (x - mu) ** 2 / (2.0 * var)
