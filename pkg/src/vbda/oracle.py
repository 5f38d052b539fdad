"""Ground-truth computations for tests: exact enumeration and numeric MLEs.

This module deliberately avoids the Taylor shortcuts used by the fitting
code.  The enumeration walks all 2^(p+1) configurations of (gamma, y_new)
with the *exact* with-new-observation statistics, accumulating weights in
log space; the numeric checks re-derive the likelihood ratio statistics by
direct optimization of the Gaussian log-likelihoods, with no closed-form
variance estimates involved.  Both exist to catch sign and scaling mistakes
in the analytic code paths, and are exposed through the command line for
desk-scale runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import betaln, gammaln, logsumexp

from .core import (
    CapacityError,
    DataValidationError,
    Dataset,
    Hyperparameters,
    compute_stats_with_new,
    lambda_lrt_lda,
    lambda_lrt_qda,
    log_b_gamma,
    xi,
)

__all__ = [
    "ExactPosterior",
    "lambda_bayes_lda",
    "lambda_bayes_qda",
    "exact_posterior",
    "numeric_mle_check",
    "numeric_lambda_lrt",
    "ENUMERATION_MAX_P",
]

ENUMERATION_MAX_P = 15


def lambda_bayes_lda(d: Dataset, x_new, y_new: int, j: int | None = None):
    """Exact per-variable evidence statistic for the shared-variance model.

    lambda_bayes_j = lambda_lrt_j(with-new statistics) - log(n+1), where the
    statistics include (x_new, y_new) and n is the training count.  Returns
    the full length-p vector, or one entry if ``j`` is given.
    """
    s = compute_stats_with_new(d, x_new, y_new)
    lam = lambda_lrt_lda(s, d.n) - math.log(d.n + 1.0)
    return lam if j is None else float(lam[j])


def lambda_bayes_qda(d: Dataset, x_new, y_new: int, j: int | None = None):
    """Exact per-variable evidence statistic for the separate-variance model.

    lambda_bayes_j = lambda_lrt_j + log(n1 + y_new) + log(n0 + 1 - y_new)
                     - log 2 - 3 log(n+1)
                     - 2 xi((n+1)/2) + 2 xi((n1 + y_new)/2)
                     + 2 xi((n0 + 1 - y_new)/2),

    with the with-new statistics and multipliers (n+1, n1 + y_new,
    n0 + 1 - y_new) inside lambda_lrt.  Asymptotically this collapses to
    lambda_lrt - 2 log(n+1) + O(1/n1 + 1/n0).
    """
    s = compute_stats_with_new(d, x_new, y_new)
    n, n1, n0 = d.n, d.n1, d.n0
    m1 = n1 + y_new
    m0 = n0 + 1 - y_new
    lam = (
        lambda_lrt_qda(s, n, m1, m0)
        + math.log(m1)
        + math.log(m0)
        - math.log(2.0)
        - 3.0 * math.log(n + 1.0)
        - 2.0 * xi((n + 1) / 2.0)
        + 2.0 * xi(m1 / 2.0)
        + 2.0 * xi(m0 / 2.0)
    )
    return lam if j is None else float(lam[j])


# Above this value of log(b) the direct route through exp(log_b) would lose
# precision or overflow, and the two-term asymptotic expansion of
# log B(a, b) is already accurate to ~a^3/b^2 < 1e-20.
_LOG_BETA_ASYMPTOTIC_CUTOFF = 25.0


def _log_beta_shifted(a: float, log_b: float, shift: float) -> float:
    """log B(a, b + shift) where b is supplied as log(b) and may be huge."""
    if log_b <= _LOG_BETA_ASYMPTOTIC_CUTOFF:
        return float(betaln(a, math.exp(log_b) + shift))
    log_bsum = np.logaddexp(log_b, math.log(shift)) if shift > 0 else log_b
    return float(
        gammaln(a) - a * log_bsum - 0.5 * a * (a - 1.0) * math.exp(-log_bsum)
    )


@dataclass(frozen=True)
class ExactPosterior:
    """Joint enumeration over (gamma, y_new) on a small problem.

    ``log_weights[g, y]`` is the log joint weight of configuration row g of
    ``gammas`` with new label y, up to one additive constant shared by every
    configuration (the product of null-model marginals, which cancels from
    all posterior quantities).  ``log_marginal`` is the log-sum-exp of the
    weights modulo the same constant.
    """

    gammas: np.ndarray
    log_weights: np.ndarray
    gamma_marginals: np.ndarray
    y_marginal: float
    log_marginal: float


def exact_posterior(
    d: Dataset,
    x_new,
    h: Hyperparameters | None = None,
    model: str = "vlda",
) -> ExactPosterior:
    """Enumerate the exact posterior over all 2^(p+1) configurations.

    Every weight combines the label-prior Beta mass, the inclusion-prior
    Beta mass, and half the summed evidence statistics of the included
    variables:

        log w(gamma, y) = log B(a_y + n1 + y, b_y + n0 + 1 - y)
                          + log B(a_gamma + 1'gamma, b_gamma + p - 1'gamma)
                          + (1/2) gamma' lambda_bayes(y)

    accumulated in log space with one final log-sum-exp.  Refuses p > 15.
    """
    h = h or Hyperparameters()
    d.validate_training()
    if d.p > ENUMERATION_MAX_P:
        raise CapacityError(
            f"exact enumeration is limited to p <= {ENUMERATION_MAX_P}, got p={d.p}"
        )
    if model not in ("vlda", "vqda"):
        raise DataValidationError(f"unknown model {model!r}")
    lam_fn = lambda_bayes_lda if model == "vlda" else lambda_bayes_qda
    lam = np.stack([lam_fn(d, x_new, 0), lam_fn(d, x_new, 1)])

    p = d.p
    n_cfg = 1 << p
    # Bit j of the row index is gamma_j, so row ordering is reproducible.
    gammas = ((np.arange(n_cfg)[:, None] >> np.arange(p)) & 1).astype(np.float64)
    k = gammas.sum(axis=1).astype(np.intp)
    log_bg = log_b_gamma(d.n, d.p, h.r, h.kappa)
    prior_by_count = np.array(
        [_log_beta_shifted(h.a_gamma + kk, log_bg, float(p - kk)) for kk in range(p + 1)]
    )
    log_weights = np.empty((n_cfg, 2))
    for y in (0, 1):
        log_label_prior = float(
            betaln(h.a_y + d.n1 + y, h.b_y + d.n0 + 1 - y)
        )
        log_weights[:, y] = log_label_prior + prior_by_count[k] + 0.5 * (gammas @ lam[y])
    log_marginal = float(logsumexp(log_weights))
    post = np.exp(log_weights - log_marginal)
    y_marginal = float(post[:, 1].sum())
    gamma_marginals = post.sum(axis=1) @ gammas
    return ExactPosterior(
        gammas=gammas.astype(np.int8),
        log_weights=log_weights,
        gamma_marginals=gamma_marginals,
        y_marginal=y_marginal,
        log_marginal=log_marginal,
    )


def _neg_loglik_factory(x: np.ndarray, y: np.ndarray, kind: str, floor: float):
    n = x.shape[0]
    x1 = x[y == 1]
    x0 = x[y == 0]

    if kind == "null":

        def f(theta):
            mu, logv = theta
            v = max(math.exp(logv), floor)
            return 0.5 * n * math.log(2.0 * math.pi * v) + float(
                np.sum((x - mu) ** 2)
            ) / (2.0 * v)

    elif kind == "lda":

        def f(theta):
            mu1, mu0, logv = theta
            v = max(math.exp(logv), floor)
            ss = float(np.sum((x1 - mu1) ** 2)) + float(np.sum((x0 - mu0) ** 2))
            return 0.5 * n * math.log(2.0 * math.pi * v) + ss / (2.0 * v)

    elif kind == "qda":

        def f(theta):
            mu1, mu0, logv1, logv0 = theta
            v1 = max(math.exp(logv1), floor)
            v0 = max(math.exp(logv0), floor)
            return (
                0.5 * x1.shape[0] * math.log(2.0 * math.pi * v1)
                + float(np.sum((x1 - mu1) ** 2)) / (2.0 * v1)
                + 0.5 * x0.shape[0] * math.log(2.0 * math.pi * v0)
                + float(np.sum((x0 - mu0) ** 2)) / (2.0 * v0)
            )

    else:  # pragma: no cover - internal misuse
        raise ValueError(kind)
    return f


_NM_OPTIONS = {"xatol": 1e-11, "fatol": 1e-13, "maxiter": 40000, "maxfev": 40000}


def _maximize(fun, x0) -> tuple[float, np.ndarray]:
    # Restarting from the incumbent re-inflates the simplex and recovers the
    # last digits; the statistic amplifies log-variance error by (n+1).
    res = minimize(fun, np.asarray(x0, dtype=np.float64), method="Nelder-Mead",
                   options=_NM_OPTIONS)
    for _ in range(3):
        nxt = minimize(fun, res.x, method="Nelder-Mead", options=_NM_OPTIONS)
        if not nxt.fun < res.fun:
            break
        res = nxt
    return -float(res.fun), np.asarray(res.x)


def _start_points(x: np.ndarray, y: np.ndarray, floor: float):
    # Rough moment starts; the optimizer does the real work.  Log-variance
    # parameterization keeps the search unconstrained and well scaled.
    m = float(x.mean())
    m1 = float(x[y == 1].mean())
    m0 = float(x[y == 0].mean())
    logv = math.log(max(float(x.var()), floor))
    return m, m1, m0, logv


def numeric_mle_check(
    x_col, y, model: str = "lda", variance_floor: float = 1e-12
) -> float:
    """Difference of numerically maximized log-likelihoods (alternative - null).

    Direct simplex maximization over (means, log variances); the closed-form
    estimates are not consulted.  For the shared-variance model the
    statistic relates to the analytic one by
    lambda_lrt = 2 * (n+1)/n * (ll_alt - ll_null).  Variances are clamped
    at the floor inside the objective, so a constant column yields 0.
    """
    x = np.asarray(x_col, dtype=np.float64).reshape(-1)
    y = np.asarray(y).reshape(-1)
    m, m1, m0, logv = _start_points(x, y, variance_floor)
    ll_null, _ = _maximize(
        _neg_loglik_factory(x, y, "null", variance_floor), [m, logv]
    )
    if model == "lda":
        ll_alt, _ = _maximize(
            _neg_loglik_factory(x, y, "lda", variance_floor), [m1, m0, logv]
        )
    elif model == "qda":
        ll_alt, _ = _maximize(
            _neg_loglik_factory(x, y, "qda", variance_floor), [m1, m0, logv, logv]
        )
    else:
        raise DataValidationError(f"unknown model {model!r}")
    return ll_alt - ll_null


def numeric_lambda_lrt(
    x_col, y, model: str = "lda", variance_floor: float = 1e-12
) -> float:
    """Likelihood ratio statistic assembled from numeric maximization.

    Built on the maximized log-likelihood VALUES rather than the argmax
    coordinates: near an optimum the value is quadratically insensitive to
    the remaining argmax error, while the statistic would amplify a
    log-variance error by a factor of n+1.  For the shared-variance model
    the ratio statistic is exactly 2(n+1)/n times the likelihood
    difference; the group-specific variant needs one extra log of the null
    variance (unit coefficient, so the argmax read-off is accurate enough).
    No closed-form estimator is consulted anywhere.
    """
    x = np.asarray(x_col, dtype=np.float64).reshape(-1)
    y = np.asarray(y).reshape(-1)
    n = x.shape[0]
    m, m1, m0, logv = _start_points(x, y, variance_floor)
    ll_null, theta_null = _maximize(
        _neg_loglik_factory(x, y, "null", variance_floor), [m, logv]
    )
    if model == "lda":
        ll_alt, _ = _maximize(
            _neg_loglik_factory(x, y, "lda", variance_floor), [m1, m0, logv]
        )
        return 2.0 * (n + 1.0) / n * (ll_alt - ll_null)
    if model == "qda":
        ll_alt, _ = _maximize(
            _neg_loglik_factory(x, y, "qda", variance_floor), [m1, m0, logv, logv]
        )
        v_null = max(math.exp(theta_null[1]), variance_floor)
        return 2.0 * (ll_alt - ll_null) + math.log(v_null)
    raise DataValidationError(f"unknown model {model!r}")
