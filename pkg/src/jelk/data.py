"""Labeled samples, the pooled view and the Euclidean distance matrix."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .errors import DomainError, ValidationError

MIN_GROUP_SIZE = 3


@dataclass(frozen=True)
class Sample:
    """One group of observations, stored as an ``n_k x d`` array."""

    label: Hashable
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise ValidationError(f"group {self.label!r}: points must be an n x d array")
        if not np.all(np.isfinite(pts)):
            raise ValidationError(f"group {self.label!r}: non-finite coordinates")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class PooledData:
    """K samples concatenated in order.

    Attributes:
        samples: the groups, in the order given.
        points: ``n x d`` concatenation of all groups.
        sizes: group sizes ``n_k``.
        alpha_hat: sample fractions ``n_k / n``; the last entry is the
            complement of the others so the vector sums to one exactly.
        offsets: start row of each group in ``points``.
    """

    samples: tuple[Sample, ...]
    points: np.ndarray
    sizes: np.ndarray
    alpha_hat: np.ndarray
    offsets: np.ndarray
    labels: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def k(self) -> int:
        return len(self.samples)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def group_labels(self) -> list:
        return [s.label for s in self.samples]

    def group_slice(self, k: int) -> slice:
        return slice(int(self.offsets[k]), int(self.offsets[k] + self.sizes[k]))

    def group_indices(self) -> list[np.ndarray]:
        return [np.arange(self.offsets[k], self.offsets[k] + self.sizes[k]) for k in range(self.k)]

    def locate(self, i: int) -> tuple[int, int]:
        """Map a pooled row index to ``(group position, index within group)``."""
        k = int(self.labels[i])
        return k, int(i - self.offsets[k])


def build_pooled(samples: Sequence[Sample], min_group_size: int = MIN_GROUP_SIZE) -> PooledData:
    """Validate and concatenate samples.

    ``min_group_size`` defaults to 3, the smallest size for which the
    leave-one-out U-statistics are defined.
    """
    samples = tuple(s if isinstance(s, Sample) else Sample(*s) for s in samples)
    if len(samples) < 2:
        raise ValidationError(f"need at least 2 groups, got {len(samples)}")
    dims = {s.dim for s in samples}
    if len(dims) != 1:
        detail = ", ".join(f"{s.label!r}: d={s.dim}" for s in samples)
        raise ValidationError(f"groups have inconsistent dimensions ({detail})")
    for s in samples:
        if s.size < min_group_size:
            raise ValidationError(
                f"group {s.label!r} has {s.size} observations; at least {min_group_size} required"
            )
    sizes = np.array([s.size for s in samples], dtype=np.int64)
    n = int(sizes.sum())
    alpha = sizes / n
    alpha[-1] = 1.0 - alpha[:-1].sum()
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    points = np.concatenate([s.points for s in samples], axis=0)
    labels = np.repeat(np.arange(len(samples)), sizes)
    for arr in (points, sizes, alpha, offsets, labels):
        arr.setflags(write=False)
    return PooledData(samples, points, sizes, alpha, offsets, labels)


def pooled_from_arrays(groups: Sequence, labels: Sequence | None = None,
                       min_group_size: int = MIN_GROUP_SIZE) -> PooledData:
    """Convenience wrapper: build pooled data from plain arrays."""
    if labels is None:
        labels = range(1, len(groups) + 1)
    return build_pooled([Sample(lab, g) for lab, g in zip(labels, groups)], min_group_size)


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric matrix of pairwise Euclidean distances.

    ``row_sums[i]`` is the sum of row ``i`` and ``total`` the sum over pairs
    ``i < j``.
    """

    values: np.ndarray
    row_sums: np.ndarray
    total: float

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def restrict(self, idx) -> DistanceMatrix:
        """Sub-matrix for an index set: a view for slices, a copy otherwise."""
        sub = self.values[idx, idx] if isinstance(idx, slice) else self.values[np.ix_(idx, idx)]
        return _from_values(sub)


def _from_values(values: np.ndarray) -> DistanceMatrix:
    row_sums = values.sum(axis=1)
    return DistanceMatrix(values, row_sums, float(row_sums.sum()) / 2.0)


def pairwise_distances(points) -> DistanceMatrix:
    """Euclidean distance matrix of the rows of ``points``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[0] < 2:
        raise DomainError("need at least 2 points for a distance matrix")
    diff = pts[:, None, :] - pts[None, :, :]
    values = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    # mirror the upper triangle so each pair is computed once
    lower = np.tril_indices(values.shape[0], -1)
    values[lower] = values.T[lower]
    np.fill_diagonal(values, 0.0)
    values.setflags(write=False)
    return _from_values(values)
