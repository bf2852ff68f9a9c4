"""Jackknife empirical likelihood test of K-sample homogeneity.

The estimating equations have K+2 unknowns: a common mean ``theta`` of the
pseudo-values and one Lagrange multiplier per pseudo-value vector (pooled
plus K groups).  For fixed ``theta`` each multiplier solves a strictly
monotone scalar equation on its feasibility interval, so the system is
solved as a one-dimensional root search in ``theta`` over nested scalar
solves.  Writing ``G(theta)`` for the remaining equation, the inner
equations give ``G = -(n lambda + sum_k n_k lambda_k)``; every multiplier
decreases in ``theta``, so ``G`` is increasing and its root is unique.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .data import PooledData, pairwise_distances
from .errors import (
    ConvergenceError,
    DegenerateDataError,
    DomainError,
    FeasibilityError,
    InfeasibleThetaError,
)
from .jackknife import PseudoValues, all_pseudo_values
from .rootfind import brentq
from .stats import chi_square_quantile, chi_square_sf

_EPS = sys.float_info.epsilon


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances of the nested solver.

    Attributes:
        inner_tol: per-observation tolerance on each multiplier equation.
        outer_tol: absolute tolerance on every equation residual at the
            returned solution.
        max_iter: iteration cap for each scalar root search.
        bracket_margin: relative inset of the ``theta`` bracket from the
            ends of the feasibility interval.
    """

    inner_tol: float = 1e-12
    outer_tol: float = 1e-10
    max_iter: int = 200
    bracket_margin: float = 1e-9

    def __post_init__(self):
        if not (self.inner_tol > 0 and self.outer_tol > 0):
            raise DomainError("solver tolerances must be positive")
        if self.max_iter < 1:
            raise DomainError("max_iter must be positive")
        if not 0 < self.bracket_margin < 0.5:
            raise DomainError("bracket_margin must lie in (0, 0.5)")


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True)
class JelSolution:
    theta: float
    lambda_pooled: float
    lambda_group: np.ndarray
    neg2logR: float
    residuals: np.ndarray
    converged: bool
    iterations: int

    @property
    def lambdas(self) -> np.ndarray:
        return np.concatenate([[self.lambda_pooled], self.lambda_group])


@dataclass(frozen=True)
class TestResult:
    """Outcome of a homogeneity test.

    ``reject`` is true when the p-value is strictly below ``alpha``; a
    statistic exactly at the critical value is not rejected.
    """

    statistic: float
    df: int
    p_value: float
    alpha: float
    reject: bool
    method: str = "JEL-S"
    details: dict = field(default_factory=dict, compare=False)

    __test__ = False  # keep pytest from collecting this class


def _solve_lambda(d, tol, max_iter, lam=0.0, target=None):
    # root of sum d / (1 + lam d) on (-1/max d, -1/min d); the sum is
    # strictly decreasing in lam, so the sign of f moves the bracket
    dmax = d.max()
    dmin = d.min()
    if not (dmin < 0.0 < dmax):
        raise InfeasibleThetaError("theta is not strictly inside the range of the pseudo-values")
    lo = -1.0 / dmax
    hi = -1.0 / dmin
    if not lo < lam < hi:
        lam = 0.0
    target = tol * d.size if target is None else target
    for it in range(1, max_iter + 1):
        q = d / (1.0 + lam * d)
        f = q.sum()
        if abs(f) <= target:
            return lam, it
        if f > 0:
            lo = lam
        else:
            hi = lam
        step = lam + f / np.dot(q, q)
        if not lo < step < hi:
            step = 0.5 * (lo + hi)
        if step == lam or hi - lo <= 4 * _EPS * max(abs(lo), abs(hi)):
            # bracket exhausted at machine precision
            return lam, it
        lam = step
    raise ConvergenceError(
        f"multiplier search did not converge in {max_iter} iterations",
        bracket=(lo, hi),
        diagnostics={"lambda": lam},
    )


def inner_lambda(v, theta: float, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """Multiplier solving ``sum (v_i - theta) / (1 + lam (v_i - theta)) = 0``.

    Raises:
        InfeasibleThetaError: ``theta`` is not strictly between min and max
            of ``v``.
        ConvergenceError: no convergence within ``cfg.max_iter`` steps.
    """
    d = np.asarray(v, dtype=float) - theta
    lam, _ = _solve_lambda(d, cfg.inner_tol, cfg.max_iter)
    return lam


def feasibility_interval(vectors) -> tuple[float, float]:
    """Intersection of the open ranges ``(min v, max v)`` over all vectors."""
    lo = max(float(v.min()) for v in vectors)
    hi = min(float(v.max()) for v in vectors)
    return lo, hi


def equation_residuals(vectors, theta, lambdas) -> np.ndarray:
    """Left-hand sides of the K+2 estimating equations."""
    res = np.empty(len(vectors) + 1)
    third = 0.0
    for j, (v, lam) in enumerate(zip(vectors, lambdas)):
        d = v - theta
        den = 1.0 + lam * d
        res[j] = np.sum(d / den)
        third += lam * np.sum(-1.0 / den)
    res[-1] = third
    return res


def _neg2logr(vectors, theta, lambdas) -> float:
    total = 0.0
    for v, lam in zip(vectors, lambdas):
        arg = lam * (v - theta)
        if np.any(arg <= -1.0):
            raise FeasibilityError("non-positive empirical likelihood weight")
        total += np.log1p(arg).sum()
    return 2.0 * float(total)


class _Profile:
    """Multipliers as functions of theta, with warm starts."""

    def __init__(self, vectors, cfg):
        self.vectors = vectors
        self.cfg = cfg
        self.last = [0.0] * len(vectors)
        self.inner_iterations = 0
        # the inner equations are also residuals of the full system
        self.targets = [min(cfg.inner_tol * v.size, 0.1 * cfg.outer_tol) for v in vectors]

    def lambdas(self, theta, polish=False):
        out = []
        for j, v in enumerate(self.vectors):
            # the last equation carries inner residuals scaled by lambda^2
            target = 0.0 if polish else min(self.targets[j], self.targets[j] / max(1.0, self.last[j] ** 2))
            lam, it = _solve_lambda(v - theta, self.cfg.inner_tol, self.cfg.max_iter,
                                    self.last[j], target)
            self.inner_iterations += it
            out.append(lam)
        self.last = out
        return out

    def g(self, theta):
        return float(equation_residuals(self.vectors, theta, self.lambdas(theta))[-1])


def solve_system(pv: PseudoValues, alpha_hat=None, cfg: SolverConfig = DEFAULT_CONFIG) -> JelSolution:
    """Solve the estimating equations for ``(theta, lambda, lambda_1..K)``.

    ``alpha_hat``, when given, is checked against the group sizes; it does
    not otherwise enter the equations.

    Raises:
        DegenerateDataError: the feasibility interval is empty.
        ConvergenceError: the root search fails and no point of the bracket
            meets ``cfg.outer_tol``.
    """
    vectors = tuple(np.asarray(v, dtype=float) for v in pv.vectors)
    if alpha_hat is not None:
        sizes = np.array([v.size for v in vectors[1:]])
        if not np.allclose(np.asarray(alpha_hat), sizes / sizes.sum(), rtol=0, atol=1e-12):
            raise DomainError("alpha_hat does not match the group sizes")
    lo, hi = feasibility_interval(vectors)
    if not lo < hi:
        raise DegenerateDataError(
            f"empty feasibility interval: max of minima {lo!r} >= min of maxima {hi!r}"
        )

    prof = _Profile(vectors, cfg)
    width = hi - lo
    margin = cfg.bracket_margin
    a = lo + margin * width
    b = hi - margin * width
    ga, gb = prof.g(a), prof.g(b)
    while ga * gb > 0 and margin > 1e-15:
        margin *= 1e-3
        a, b = lo + margin * width, hi - margin * width
        ga, gb = prof.g(a), prof.g(b)

    if ga * gb <= 0:
        theta, iterations = brentq(prof.g, a, b, xtol=4 * _EPS * max(abs(a), abs(b)),
                                   rtol=4 * _EPS, maxiter=cfg.max_iter, fa=ga, fb=gb)
    else:
        theta, iterations = _min_abs_g(prof, a, b)

    # re-solve the multipliers to machine precision at the returned theta
    lambdas = prof.lambdas(theta, polish=True)
    residuals = equation_residuals(vectors, theta, lambdas)
    worst = float(np.max(np.abs(residuals)))
    converged = worst <= cfg.outer_tol
    if not converged and ga * gb > 0:
        raise ConvergenceError(
            "no sign change of the theta equation and minimum residual above tolerance",
            bracket=(a, b),
            diagnostics={"theta": theta, "residuals": residuals.tolist(), "g_ends": (ga, gb)},
        )
    stat = max(_neg2logr(vectors, theta, lambdas), 0.0)
    return JelSolution(
        theta=float(theta),
        lambda_pooled=float(lambdas[0]),
        lambda_group=np.array(lambdas[1:], dtype=float),
        neg2logR=stat,
        residuals=residuals,
        converged=converged,
        iterations=iterations,
    )


def _min_abs_g(prof, a, b, points=401):
    grid = np.linspace(a, b, points)
    vals = np.array([abs(prof.g(t)) for t in grid])
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, points - 1)]
    # golden-section refinement of |G| on the best cell
    invphi = (math.sqrt(5) - 1) / 2
    it = 0
    while hi - lo > 4 * _EPS * max(abs(lo), abs(hi), 1.0) and it < prof.cfg.max_iter:
        c = hi - invphi * (hi - lo)
        d = lo + invphi * (hi - lo)
        if abs(prof.g(c)) < abs(prof.g(d)):
            hi = d
        else:
            lo = c
        it += 1
    return 0.5 * (lo + hi), points + it


def neg2_log_likelihood(pv: PseudoValues, sol: JelSolution) -> float:
    """``-2 log R`` at a solution."""
    return _neg2logr(pv.vectors, sol.theta, sol.lambdas)


def weights(pv: PseudoValues, sol: JelSolution):
    """Empirical likelihood weights implied by a solution.

    Returns the pooled weight vector and a list of the K group weight
    vectors.
    """
    out = []
    for v, lam in zip(pv.vectors, sol.lambdas):
        den = 1.0 + lam * (v - sol.theta)
        if np.any(den <= 0):
            raise FeasibilityError("solution is infeasible: non-positive weight")
        out.append(1.0 / (v.size * den))
    return out[0], out[1:]


def jel_test(pooled: PooledData, alpha: float = 0.05, cfg: SolverConfig = DEFAULT_CONFIG,
             dm=None) -> TestResult:
    """Jackknife empirical likelihood test that all K groups share one law.

    The statistic ``-2 log R`` is referred to chi-square with K-1 degrees
    of freedom.
    """
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if dm is None:
        dm = pairwise_distances(pooled.points)
    pv = all_pseudo_values(pooled, dm)
    try:
        sol = solve_system(pv, pooled.alpha_hat, cfg)
    except (ConvergenceError, DegenerateDataError) as exc:
        if isinstance(exc, ConvergenceError):
            exc.diagnostics.setdefault("sizes", pooled.sizes.tolist())
        raise
    df = pooled.k - 1
    p = chi_square_sf(sol.neg2logR, df)
    crit = chi_square_quantile(1.0 - alpha, df)
    return TestResult(
        statistic=sol.neg2logR,
        df=df,
        p_value=p,
        alpha=alpha,
        reject=bool(sol.neg2logR > crit),
        method="JEL-S",
        details={
            "theta": sol.theta,
            "lambdas": sol.lambdas.tolist(),
            "max_residual": float(np.max(np.abs(sol.residuals))),
            "converged": sol.converged,
            "iterations": sol.iterations,
            "critical_value": crit,
        },
    )
