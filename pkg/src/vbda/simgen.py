"""Synthetic two-group Gaussian data with controlled signal and correlation.

The study grid crosses four mean specifications with four correlation
structures (sixteen settings).  Group labels are balanced Bernoulli(0.5);
group-conditional draws share one covariance, built column-by-column so the
cost stays O(np) with no p-by-p factorization:

* AR(1) chains use the recursion z_j = rho z_{j-1} + sqrt(1-rho^2) e_j,
  optionally restarted on block boundaries;
* uniform correlation uses the one-factor form
  z_j = sqrt(rho) g + sqrt(1-rho) e_j.

A nonzero ``delta_sigma`` inflates the group-0 standard deviation on the
signal variables to 1 + delta_sigma, producing the heterogeneous-variance
regime where the quadratic model should win.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import DataValidationError, Dataset

__all__ = [
    "MEAN_SPECS",
    "COV_SPECS",
    "SimSetting",
    "SimReplicate",
    "setting_from_index",
    "generate",
    "ar1_sample",
    "uniform_corr_sample",
    "derive_seed",
]

# mean spec -> (signal count, fixed group-1 mean or None for random draws)
MEAN_SPECS = {
    "s1": (50, 0.7),
    "s2": (100, 0.3),
    "s3": (200, 0.7),
    "s4": (10, None),  # mu_j1 ~ N(0.5, 0.3^2), drawn once per replicate
}
_S4_MEAN, _S4_SD = 0.5, 0.3

COV_SPECS = ("independence", "block_ar1", "global_ar1", "uniform")
_DEFAULT_RHO = {"independence": 0.0, "block_ar1": 0.6, "global_ar1": 0.9, "uniform": 0.8}
_BLOCK_SIZE = 100
_MAX_LABEL_REDRAWS = 100


def _rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def derive_seed(base_seed: int, *indices: int) -> int:
    """A stable child seed for the work unit at ``indices`` under ``base_seed``.

    Indices are shifted by one inside the entropy list: SeedSequence ignores
    trailing zero entropy words, which would otherwise alias (i,) with (i, 0).
    """
    for i in indices:
        if int(i) < 0:
            raise DataValidationError(f"seed indices must be nonnegative, got {i}")
    entropy = [int(base_seed), *(int(i) + 1 for i in indices)]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


@dataclass(frozen=True)
class SimSetting:
    """One cell of the simulation grid.

    ``mean_spec`` is one of s1..s4 or "custom" (then ``signal_count`` and
    ``signal_mean`` are required).  ``rho`` overrides the default correlation
    of the chosen structure.  ``delta_sigma`` adds to the group-0 SD on
    signal variables only.
    """

    mean_spec: str = "s1"
    cov_spec: str = "independence"
    p: int = 500
    n_train: int = 100
    n_valid: int = 100
    n_test: int = 1000
    delta_sigma: float = 0.0
    seed: int = 0
    rho: float | None = None
    signal_count: int | None = None
    signal_mean: float | None = None

    def __post_init__(self):
        if self.mean_spec not in MEAN_SPECS and self.mean_spec != "custom":
            raise DataValidationError(f"unknown mean spec {self.mean_spec!r}")
        if self.cov_spec not in COV_SPECS:
            raise DataValidationError(f"unknown covariance spec {self.cov_spec!r}")
        if self.mean_spec == "custom":
            if self.signal_count is None or self.signal_mean is None:
                raise DataValidationError(
                    "custom mean spec requires signal_count and signal_mean"
                )
        if self.p < 1:
            raise DataValidationError("p must be >= 1")
        if self.n_train < 4:
            raise DataValidationError("n_train must be >= 4")
        if self.n_valid < 0 or self.n_test < 0:
            raise DataValidationError("split sizes must be nonnegative")
        if self.delta_sigma < 0:
            raise DataValidationError("delta_sigma must be nonnegative")
        if self.signal_count is not None and not 0 <= self.signal_count <= self.p:
            raise DataValidationError("signal_count must lie in [0, p]")
        if self.p1 > self.p:
            raise DataValidationError(
                f"mean spec {self.mean_spec!r} needs p >= {self.p1}, got p={self.p}"
            )
        rho = self.effective_rho
        if not -1.0 < rho < 1.0:
            raise DataValidationError(f"rho must lie in (-1, 1), got {rho}")
        if self.cov_spec == "uniform" and rho < 0.0:
            raise DataValidationError("uniform correlation requires rho >= 0")
        if self.cov_spec == "block_ar1" and self.p % _BLOCK_SIZE != 0:
            raise DataValidationError(
                f"block AR(1) needs p divisible by {_BLOCK_SIZE}, got p={self.p}"
            )

    @property
    def p1(self) -> int:
        if self.signal_count is not None:
            return self.signal_count
        return MEAN_SPECS[self.mean_spec][0]

    @property
    def effective_rho(self) -> float:
        return _DEFAULT_RHO[self.cov_spec] if self.rho is None else self.rho


def setting_from_index(index: int, **overrides) -> SimSetting:
    """Settings 1-16: {s, s+4, s+8, s+12} share mean spec s and sweep the
    covariance structures in the order independence, block AR(1), global
    AR(1), uniform."""
    if not 1 <= index <= 16:
        raise DataValidationError(f"setting index must be in 1..16, got {index}")
    mean = ("s1", "s2", "s3", "s4")[(index - 1) % 4]
    cov = COV_SPECS[(index - 1) // 4]
    return SimSetting(mean_spec=mean, cov_spec=cov, **overrides)


@dataclass(frozen=True)
class SimReplicate:
    """Train/valid/test datasets plus the generating truth."""

    train: Dataset
    valid: Dataset | None
    test: Dataset | None
    gamma_true: np.ndarray
    mu1: np.ndarray
    sigma0: np.ndarray
    setting: SimSetting


def ar1_sample(p: int, rho: float, n: int, seed, block_size: int | None = None):
    """n-by-p standard normals with AR(1) cross-column correlation.

    Generated by the stationary recursion, so every column is marginally
    N(0,1) and corr(z_j, z_k) = rho^|j-k| exactly (within a block when
    ``block_size`` is set; blocks are independent).
    """
    if not -1.0 < rho < 1.0:
        raise DataValidationError(f"AR(1) requires |rho| < 1, got {rho}")
    rng = _rng(seed)
    z = rng.standard_normal((n, p))
    if rho == 0.0:
        return z
    carry = np.sqrt(1.0 - rho * rho)
    for j in range(1, p):
        if block_size is not None and j % block_size == 0:
            continue  # new independent chain
        z[:, j] = rho * z[:, j - 1] + carry * z[:, j]
    return z


def uniform_corr_sample(p: int, rho: float, n: int, seed):
    """n-by-p standard normals with constant pairwise correlation rho.

    One shared factor per row: z_j = sqrt(rho) g + sqrt(1-rho) e_j.
    """
    if not 0.0 <= rho < 1.0:
        raise DataValidationError(f"uniform correlation requires rho in [0, 1), got {rho}")
    rng = _rng(seed)
    g = rng.standard_normal((n, 1))
    e = rng.standard_normal((n, p))
    return np.sqrt(rho) * g + np.sqrt(1.0 - rho) * e


def _correlated_normals(s: SimSetting, n: int, rng: np.random.Generator):
    rho = s.effective_rho
    if s.cov_spec == "independence":
        return rng.standard_normal((n, s.p))
    if s.cov_spec == "block_ar1":
        return ar1_sample(s.p, rho, n, rng, block_size=_BLOCK_SIZE)
    if s.cov_spec == "global_ar1":
        return ar1_sample(s.p, rho, n, rng)
    return uniform_corr_sample(s.p, rho, n, rng)


def generate(s: SimSetting) -> SimReplicate:
    """Draw one replicate: labels, correlated noise, then mean/scale shifts.

    Labels are redrawn (up to a bounded number of attempts) if the training
    slice ends up with fewer than two observations in either group, which
    keeps every replicate a valid training set.  Deterministic given
    ``s.seed``.
    """
    rng = np.random.default_rng(s.seed)
    p1 = s.p1
    signal = np.arange(p1)
    mu1 = np.zeros(s.p)
    if s.mean_spec == "custom":
        mu1[signal] = s.signal_mean
    elif s.mean_spec == "s4":
        mu1[signal] = rng.normal(_S4_MEAN, _S4_SD, size=p1)
    else:
        mu1[signal] = MEAN_SPECS[s.mean_spec][1]
    sigma0 = np.ones(s.p)
    sigma0[signal] += s.delta_sigma

    total = s.n_train + s.n_valid + s.n_test
    for attempt in range(_MAX_LABEL_REDRAWS):
        y = rng.integers(0, 2, size=total)
        y_train = y[: s.n_train]
        if 2 <= y_train.sum() <= s.n_train - 2:
            break
    else:
        raise DataValidationError(
            f"could not draw a training split with two observations per group "
            f"in {_MAX_LABEL_REDRAWS} attempts (n_train={s.n_train})"
        )

    X = _correlated_normals(s, total, rng)
    is0 = y == 0
    if s.delta_sigma > 0:
        X[np.ix_(is0, signal)] *= sigma0[signal]
    X[np.ix_(~is0, signal)] += mu1[signal]

    columns = tuple(f"v{j + 1}" for j in range(s.p))

    def cut(lo, hi):
        if hi == lo:
            return None
        return Dataset(X[lo:hi], y[lo:hi], columns=columns)

    n_t, n_v = s.n_train, s.n_valid
    gamma_true = np.zeros(s.p, dtype=bool)
    gamma_true[signal] = True
    return SimReplicate(
        train=cut(0, n_t),
        valid=cut(n_t, n_t + n_v),
        test=cut(n_t + n_v, total),
        gamma_true=gamma_true,
        mu1=mu1,
        sigma0=sigma0,
        setting=s,
    )
