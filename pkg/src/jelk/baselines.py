"""Comparison tests: permutation energy test, Kruskal-Wallis and the
k-sample Anderson-Darling test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import DistanceMatrix, PooledData, pairwise_distances
from .errors import DomainError, ValidationError
from .jel import TestResult
from .stats import RngStream, as_generator, chi_square_sf


@dataclass(frozen=True)
class PermutationConfig:
    num_permutations: int = 199
    rng: RngStream = field(default_factory=lambda: RngStream(0))

    def __post_init__(self):
        if self.num_permutations < 19:
            raise DomainError("need at least 19 permutations")


def _within_sums(values: np.ndarray, onehot: np.ndarray) -> np.ndarray:
    # onehot: (..., n, K); returns (..., K) sums over within-group pairs i<j
    dl = np.matmul(values, onehot)
    return 0.5 * np.sum(onehot * dl, axis=-2)


def energy_statistic(dm: DistanceMatrix, labels: np.ndarray, k: int) -> float:
    """``n * s_hat`` for a labelling of the pooled distance matrix."""
    return float(_energy_statistics(dm, labels[None, :], k)[0])


def _energy_statistics(dm: DistanceMatrix, labels: np.ndarray, k: int) -> np.ndarray:
    n = dm.n
    sizes = np.bincount(labels[0], minlength=k).astype(float)
    onehot = (labels[..., None] == np.arange(k)).astype(float)
    within = _within_sums(dm.values, onehot)
    u_group = within / (sizes * (sizes - 1) / 2.0)
    u_pooled = dm.total / (n * (n - 1) / 2.0)
    return n * (u_pooled - u_group @ (sizes / n))


def permutation_energy_test(pooled: PooledData, cfg: PermutationConfig | None = None,
                            alpha: float = 0.05, dm: DistanceMatrix | None = None,
                            batch: int = 64) -> TestResult:
    """Permutation test with the Gini statistic ``n * s_hat``.

    Group labels are shuffled over the fixed pooled distance matrix.  The
    p-value is ``(1 + #{T_perm >= T_obs}) / (B + 1)``.
    """
    cfg = cfg or PermutationConfig()
    if dm is None:
        dm = pairwise_distances(pooled.points)
    if np.any(pooled.sizes < 2):
        raise ValidationError("permutation energy test needs at least 2 observations per group")
    gen = as_generator(cfg.rng)
    labels = np.asarray(pooled.labels)
    k = pooled.k
    observed = energy_statistic(dm, labels, k)
    # relative slack so ties with the observed value count as exceedances
    tol = 1e-12 * max(abs(observed), dm.total / max(dm.n, 1))
    exceed = 0
    remaining = cfg.num_permutations
    while remaining > 0:
        m = min(batch, remaining)
        perms = np.stack([gen.permutation(labels) for _ in range(m)])
        stats = _energy_statistics(dm, perms, k)
        exceed += int(np.sum(stats >= observed - tol))
        remaining -= m
    p = (1 + exceed) / (cfg.num_permutations + 1)
    return TestResult(observed, k - 1, p, alpha, p < alpha, method="ET",
                      details={"num_permutations": cfg.num_permutations, "exceedances": exceed})


def midranks(x: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties given the average of their positions."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    # boundaries of runs of equal values
    starts = np.flatnonzero(np.r_[True, xs[1:] != xs[:-1]])
    ends = np.r_[starts[1:], xs.size]
    avg = 0.5 * (starts + ends + 1)
    ranks = np.empty(x.size)
    ranks[order] = np.repeat(avg, ends - starts)
    return ranks


def _group_codes(labels):
    labels = np.asarray(labels)
    uniq, codes = np.unique(labels, return_inverse=True)
    return uniq, codes


def kruskal_wallis(values, labels, alpha: float = 0.05) -> TestResult:
    """Kruskal-Wallis H test with midranks and the usual tie correction."""
    x = np.asarray(values, dtype=float).ravel()
    uniq, codes = _group_codes(labels)
    k = uniq.size
    n = x.size
    if k < 2 or n < k:
        raise ValidationError("Kruskal-Wallis needs at least 2 groups and n >= K")
    ranks = midranks(x)
    sizes = np.bincount(codes, minlength=k)
    rbar = np.bincount(codes, weights=ranks, minlength=k) / sizes
    h = 12.0 / (n * (n + 1)) * np.sum(sizes * (rbar - (n + 1) / 2.0) ** 2)
    _, ties = np.unique(x, return_counts=True)
    correction = 1.0 - np.sum(ties**3 - ties) / (n**3 - n)
    if correction <= 0:
        return TestResult(0.0, k - 1, 1.0, alpha, False, method="KW")
    h /= correction
    p = chi_square_sf(h, k - 1)
    return TestResult(float(h), k - 1, p, alpha, p < alpha, method="KW")


# Scholz & Stephens (1987) table of upper quantiles of the standardized
# statistic: critical = b0 + b1 / sqrt(m) + b2 / m with m = K - 1.
_AD_LEVELS = np.array([0.25, 0.1, 0.05, 0.025, 0.01, 0.005, 0.001])
_AD_B0 = np.array([0.675, 1.281, 1.645, 1.96, 2.326, 2.573, 3.085])
_AD_B1 = np.array([-0.245, 0.25, 0.678, 1.149, 1.822, 2.364, 3.615])
_AD_B2 = np.array([-0.105, -0.305, -0.362, -0.391, -0.396, -0.345, -0.154])


def ad_critical_values(k: int) -> np.ndarray:
    m = k - 1
    return _AD_B0 + _AD_B1 / math.sqrt(m) + _AD_B2 / m


def ad_pvalue(t: float, k: int) -> float:
    """Asymptotic p-value of the standardized k-sample AD statistic.

    ``log p`` is fitted as a quadratic in the tabulated critical values;
    outside the table it is extended linearly with the end slope.
    """
    crit = ad_critical_values(k)
    logp = np.log(_AD_LEVELS)
    coef = np.polyfit(crit, logp, 2)
    if crit[0] <= t <= crit[-1]:
        return float(math.exp(np.polyval(coef, t)))
    slope_coef = np.polyder(coef)
    edge = crit[0] if t < crit[0] else crit[-1]
    val = np.polyval(coef, edge) + np.polyval(slope_coef, edge) * (t - edge)
    return float(min(1.0, math.exp(val)))


def ad_statistic(values, labels) -> tuple[float, float, float]:
    """k-sample Anderson-Darling statistic for data with ties (midrank form).

    Returns ``(A2akN, standardized, variance)`` where the standardized
    value is ``(A2akN - (K-1)) / sqrt(variance)``.
    """
    x = np.asarray(values, dtype=float).ravel()
    uniq, codes = _group_codes(labels)
    k = uniq.size
    n = x.size
    if k < 2:
        raise ValidationError("Anderson-Darling needs at least 2 groups")
    sizes = np.bincount(codes, minlength=k)
    if np.any(sizes == 0):
        raise ValidationError("every group must be non-empty")
    z, counts = np.unique(x, return_counts=True)
    if z.size < 2:
        raise DomainError("all observations are tied; Anderson-Darling is undefined")
    # B_j: count below z_j plus half the ties at z_j
    b = np.cumsum(counts) - 0.5 * counts
    denom = b * (n - b) - n * counts / 4.0
    a2 = 0.0
    for i in range(k):
        xi = x[codes == i]
        m = np.searchsorted(np.sort(xi), z, side="left") + 0.5 * _tie_counts(xi, z)
        a2 += np.sum(counts * (n * m - sizes[i] * b) ** 2 / denom) / sizes[i]
    a2 *= (n - 1) / n**2

    hsum = np.sum(1.0 / sizes)
    h = np.sum(1.0 / np.arange(1, n))
    j = np.arange(1, n - 1)
    # g = sum_{i=1}^{N-2} sum_{j=i+1}^{N-1} 1 / ((N - i) j)
    tail = np.cumsum((1.0 / np.arange(n - 1, 0, -1)))[::-1]  # tail[i-1] = sum_{j>=i} 1/j
    g = float(np.sum(tail[j] / (n - j))) if n > 2 else 0.0
    a = (4 * g - 6) * (k - 1) + (10 - 6 * g) * hsum
    bb = (2 * g - 4) * k**2 + 8 * h * k + (2 * g - 14 * h - 4) * hsum - 8 * h + 4 * g - 6
    c = (6 * h + 2 * g - 2) * k**2 + (4 * h - 4 * g + 6) * k + (2 * h - 6) * hsum + 4 * h
    d = (2 * h + 6) * k**2 - 4 * h * k
    var = (a * n**3 + bb * n**2 + c * n + d) / ((n - 1.0) * (n - 2.0) * (n - 3.0))
    return float(a2), float((a2 - (k - 1)) / math.sqrt(var)), float(var)


def _tie_counts(xi, z):
    s = np.sort(xi)
    return np.searchsorted(s, z, side="right") - np.searchsorted(s, z, side="left")


def anderson_darling_ksample(values, labels, alpha: float = 0.05) -> TestResult:
    """Scholz-Stephens k-sample Anderson-Darling test (midrank version)."""
    _, codes = _group_codes(labels)
    k = int(codes.max()) + 1
    _, t, _ = ad_statistic(values, labels)
    p = ad_pvalue(t, k)
    return TestResult(t, k - 1, p, alpha, p < alpha, method="AD")


def reduce_univariate(points, how: str = "norm") -> np.ndarray:
    """Map ``n x d`` observations to one value each.

    ``norm`` uses the Euclidean norm, ``first`` the first coordinate and
    ``mean`` the coordinate mean.  Univariate input passes through.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        return pts
    if pts.shape[1] == 1:
        return pts[:, 0]
    if how == "norm":
        return np.sqrt(np.einsum("ij,ij->i", pts, pts))
    if how == "first":
        return pts[:, 0]
    if how == "mean":
        return pts.mean(axis=1)
    raise DomainError(f"unknown reduction {how!r}")
