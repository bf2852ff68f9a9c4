"""Jackknife pseudo-values of distance U-statistics.

Leave-one-out U-statistics come from the row-sum identity
``U^(-i) = (T - r_i) / C(m-1, 2)``, so all ``m`` pseudo-values cost O(m)
once the distance matrix is available.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .data import DistanceMatrix, PooledData, pairwise_distances
from .errors import DomainError
from .gini import u_statistic


@dataclass(frozen=True)
class PseudoValues:
    """Pseudo-values for the pooled sample and for each group."""

    pooled: np.ndarray
    groups: tuple[np.ndarray, ...]
    u_pooled: float
    u_group: np.ndarray

    @property
    def vectors(self) -> tuple[np.ndarray, ...]:
        """Pooled vector followed by the group vectors."""
        return (self.pooled,) + self.groups

    @property
    def sizes(self) -> np.ndarray:
        return np.array([g.size for g in self.groups])


def pseudo_values(dm: DistanceMatrix, idx=None) -> np.ndarray:
    """Jackknife pseudo-values ``m U_m - (m-1) U^(-i)`` over an index set.

    Args:
        dm: distance matrix of the full data.
        idx: optional slice or integer index array selecting a sub-sample;
            the whole matrix when omitted.
    """
    sub = dm if idx is None else dm.restrict(idx)
    m = sub.n
    if m < 3:
        raise DomainError(f"pseudo-values need at least 3 observations, got {m}")
    u = sub.total / comb(m, 2)
    u_loo = (sub.total - sub.row_sums) / comb(m - 1, 2)
    return m * u - (m - 1) * u_loo


def all_pseudo_values(pooled: PooledData, dm: DistanceMatrix | None = None) -> PseudoValues:
    """Pooled and per-group pseudo-values.

    Pooled pseudo-values use every pair, including pairs across groups.
    """
    if dm is None:
        dm = pairwise_distances(pooled.points)
    if dm.n != pooled.n:
        raise DomainError("distance matrix does not match the pooled data")
    groups = tuple(pseudo_values(dm, pooled.group_slice(k)) for k in range(pooled.k))
    pooled_v = pseudo_values(dm)
    u_group = np.array([u_statistic(dm.restrict(pooled.group_slice(k))) for k in range(pooled.k)])
    return PseudoValues(pooled_v, groups, u_statistic(dm), u_group)


def pseudo_values_from_groups(dm: DistanceMatrix, groups) -> PseudoValues:
    """Like :func:`all_pseudo_values` for arbitrary index sets of ``dm``."""
    gv = tuple(pseudo_values(dm, g) for g in groups)
    pv = pseudo_values(dm)
    u_group = np.array([u_statistic(dm.restrict(g)) for g in groups])
    return PseudoValues(pv, gv, u_statistic(dm), u_group)
