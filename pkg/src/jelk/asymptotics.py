"""Numerical checks of the matrix identities behind the chi-square limit.

For sample fractions ``alpha`` (K entries summing to one) the limiting
quadratic form involves the covariance pattern ``Sigma0``, the contrast
matrix ``A`` and the weight matrix ``W0``.  The limit is chi-square with
K-1 degrees of freedom because ``A' W0 A = A`` and ``Sigma0 A`` has
eigenvalues ``{0, 0, 1, ..., 1}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class WilksMatrices:
    sigma0: np.ndarray
    a_mat: np.ndarray
    w0: np.ndarray


@dataclass(frozen=True)
class WilksCheck:
    eigenvalues: np.ndarray
    trace: float
    identity_residual: float
    identity_ok: bool
    eigen_ok: bool
    trace_ok: bool

    @property
    def ok(self) -> bool:
        return self.identity_ok and self.eigen_ok and self.trace_ok


def _check_alpha(alpha) -> np.ndarray:
    a = np.asarray(alpha, dtype=float).ravel()
    if a.size < 2:
        raise DomainError("need at least two sample fractions")
    if np.any(~np.isfinite(a)) or np.any(a <= 0):
        raise DomainError("sample fractions must be positive")
    if abs(a.sum() - 1.0) > 1e-12:
        raise DomainError(f"sample fractions must sum to 1, got {a.sum()!r}")
    return a


def build_wilks_matrices(alpha) -> WilksMatrices:
    a = _check_alpha(alpha)
    k = a.size
    diag = np.r_[1.0, a]
    sigma0 = np.diag(diag)
    sigma0[0, 1:] = a
    sigma0[1:, 0] = a
    a_mat = np.full((k + 1, k + 1), -0.5)
    a_mat[0, 0] = 0.5
    a_mat[np.arange(1, k + 1), np.arange(1, k + 1)] = 1.0 / a - 0.5
    return WilksMatrices(sigma0, a_mat, np.diag(diag))


def _psd_sqrt(m):
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


def sigma_a_eigenvalues(mats: WilksMatrices) -> np.ndarray:
    """Sorted eigenvalues of ``Sigma0 A``.

    ``Sigma0`` is positive semi-definite and ``A`` symmetric, so the
    eigenvalues equal those of the symmetric ``Sigma0^(1/2) A Sigma0^(1/2)``.
    If the symmetric square root fails the general eigensolver is used.
    """
    try:
        root = _psd_sqrt(mats.sigma0)
        sym = root @ mats.a_mat @ root
        ev = np.linalg.eigvalsh(0.5 * (sym + sym.T))
    except np.linalg.LinAlgError:
        ev = np.linalg.eigvals(mats.sigma0 @ mats.a_mat).real
    return np.sort(ev)


def verify_wilks(alpha, eig_tol: float = 1e-8, trace_tol: float = 1e-10,
                 identity_tol: float = 1e-10) -> WilksCheck:
    mats = build_wilks_matrices(alpha)
    k = mats.a_mat.shape[0] - 1
    ev = sigma_a_eigenvalues(mats)
    expected = np.r_[0.0, 0.0, np.ones(k - 1)]
    trace = float(np.trace(mats.sigma0 @ mats.a_mat))
    resid = float(np.max(np.abs(mats.a_mat.T @ mats.w0 @ mats.a_mat - mats.a_mat)))
    return WilksCheck(
        eigenvalues=ev,
        trace=trace,
        identity_residual=resid,
        identity_ok=resid <= identity_tol,
        eigen_ok=bool(np.max(np.abs(ev - expected)) <= eig_tol),
        trace_ok=abs(trace - (k - 1)) <= trace_tol,
    )


def b_matrix(alpha, sigma2: float, group_sigma2) -> np.ndarray:
    """Linearization matrix of the estimating equations at the null.

    ``sigma2`` and ``group_sigma2`` are the pooled and per-group limiting
    variances of the pseudo-values.
    """
    a = _check_alpha(alpha)
    s = np.asarray(group_sigma2, dtype=float)
    k = a.size
    b = np.zeros((k + 2, k + 2))
    b[0, 0] = sigma2
    b[0, -1] = 1.0
    b[np.arange(1, k + 1), np.arange(1, k + 1)] = a * s
    b[1:k + 1, -1] = a
    b[-1, 0] = 1.0
    b[-1, 1:k + 1] = a
    return b


def b_matrix_condition(alpha, sigma2: float, group_sigma2) -> float:
    return float(np.linalg.cond(b_matrix(alpha, sigma2, group_sigma2)))


def random_alpha(k: int, rng) -> np.ndarray:
    """Random sample fractions, bounded away from zero, summing to one."""
    a = rng.dirichlet(np.ones(k)) * 0.9 + 0.1 / k
    a[-1] = 1.0 - a[:-1].sum()
    return a
