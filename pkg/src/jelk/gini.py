"""U-statistics of the Euclidean kernel, the Gini statistic and energy distance."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .data import DistanceMatrix, PooledData, pairwise_distances
from .errors import DomainError


@dataclass(frozen=True)
class GiniStats:
    """Pooled and per-group Gini mean differences and derived quantities.

    ``s_hat`` estimates the between-group dispersion
    ``Delta - sum_k alpha_k Delta_k`` and ``rho_hat = s_hat / u_pooled`` the
    categorical Gini correlation (NaN when the pooled dispersion is zero).
    """

    u_pooled: float
    u_group: np.ndarray
    s_hat: float
    rho_hat: float


def u_statistic(dm: DistanceMatrix) -> float:
    """Mean distance over all unordered pairs."""
    if dm.n < 2:
        raise DomainError("U-statistic needs at least 2 points")
    return dm.total / comb(dm.n, 2)


def gini_from_groups(dm: DistanceMatrix, groups, weights=None) -> GiniStats:
    """Gini statistics for arbitrary index sets of a pooled distance matrix.

    ``groups`` is a sequence of slices or integer index arrays; ``weights``
    default to the group fractions.
    """
    n = dm.n
    u_pooled = u_statistic(dm)
    u_group = np.array([u_statistic(dm.restrict(g)) for g in groups])
    if weights is None:
        sizes = np.array([_size(g, n) for g in groups], dtype=float)
        weights = sizes / sizes.sum()
    s_hat = u_pooled - float(np.dot(weights, u_group))
    rho_hat = s_hat / u_pooled if u_pooled > 0 else float("nan")
    return GiniStats(u_pooled, u_group, s_hat, rho_hat)


def gini_statistic(pooled: PooledData, dm: DistanceMatrix | None = None) -> GiniStats:
    """Gini statistics of pooled data; group blocks are views of ``dm``."""
    if dm is None:
        dm = pairwise_distances(pooled.points)
    if dm.n != pooled.n:
        raise DomainError("distance matrix does not match the pooled data")
    groups = [pooled.group_slice(k) for k in range(pooled.k)]
    return gini_from_groups(dm, groups, pooled.alpha_hat)


def energy_distance(x, y) -> float:
    """Unbiased two-sample energy distance ``2 E|X-Y| - E|X-X'| - E|Y-Y'|``.

    Can be negative in finite samples.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if y.ndim == 1:
        y = y[:, None]
    if x.shape[0] < 2 or y.shape[0] < 2:
        raise DomainError("energy distance needs at least 2 points per sample")
    diff = x[:, None, :] - y[None, :, :]
    cross = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)).mean()
    return 2.0 * cross - u_statistic(pairwise_distances(x)) - u_statistic(pairwise_distances(y))


def _size(g, n):
    if isinstance(g, slice):
        return len(range(*g.indices(n)))
    return len(g)
