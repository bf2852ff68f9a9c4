"""Chi-square distribution functions, reproducible random streams and the
sampling distributions used by the simulation designs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .rootfind import brentq

_TINY = 1e-300
_CF_EPS = 1e-16
_MAX_TERMS = 10_000


def _regularized_gamma_series(a: float, x: float) -> float:
    # lower regularized P(a, x); converges quickly for x < a
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_TERMS):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _CF_EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _regularized_gamma_cf(a: float, x: float) -> float:
    # upper regularized Q(a, x) by modified Lentz; converges for x >= a
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        step = d * c
        h *= step
        if abs(step - 1.0) < _CF_EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def chi_square_sf(x: float, df: int) -> float:
    """Survival function ``P(X > x)`` of the chi-square distribution.

    Uses the regularized upper incomplete gamma function ``Q(df/2, x/2)``:
    a power series for the lower tail when ``x < df`` and a continued
    fraction for the upper tail otherwise.
    """
    if df < 1 or int(df) != df:
        raise DomainError(f"degrees of freedom must be a positive integer, got {df!r}")
    if not x >= 0:
        raise DomainError(f"chi-square argument must be non-negative, got {x!r}")
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    a = 0.5 * df
    xg = 0.5 * x
    if x < df:
        return 1.0 - _regularized_gamma_series(a, xg)
    return _regularized_gamma_cf(a, xg)


def chi_square_cdf(x: float, df: int) -> float:
    """Distribution function ``P(X <= x)``."""
    if df < 1 or int(df) != df:
        raise DomainError(f"degrees of freedom must be a positive integer, got {df!r}")
    if not x >= 0:
        raise DomainError(f"chi-square argument must be non-negative, got {x!r}")
    if x == 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    a = 0.5 * df
    xg = 0.5 * x
    if x < df:
        return _regularized_gamma_series(a, xg)
    return 1.0 - _regularized_gamma_cf(a, xg)


def chi_square_quantile(p: float, df: int) -> float:
    """Inverse of :func:`chi_square_cdf`.

    Solved by Brent's method on whichever tail is smaller, so quantiles
    near ``p = 1`` keep full relative accuracy in the survival function.
    """
    if not 0 < p < 1:
        raise DomainError(f"probability must lie in (0, 1), got {p!r}")
    if df < 1 or int(df) != df:
        raise DomainError(f"degrees of freedom must be a positive integer, got {df!r}")
    if df == 2:
        return -2.0 * math.log1p(-p)

    q = 1.0 - p
    if p <= 0.5:
        def f(x):
            return chi_square_cdf(x, df) - p
    else:
        def f(x):
            return q - chi_square_sf(x, df)

    hi = max(1.0, float(df))
    while f(hi) < 0:
        hi *= 2.0
    root, _ = brentq(f, 0.0, hi, xtol=1e-14, rtol=1e-15)
    return root


@dataclass(frozen=True)
class RngStream:
    """Address of an independent, reproducible random stream.

    ``(seed, index)`` selects a stream; ``key`` optionally addresses a
    sub-stream below it (e.g. data vs. permutations of one replication).
    Streams are derived with :class:`numpy.random.SeedSequence` spawn keys,
    so any stream can be built directly without advancing another.
    """

    seed: int
    index: int = 0
    key: tuple[int, ...] = ()

    def __post_init__(self):
        if self.seed < 0 or self.seed >= 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.index < 0:
            raise DomainError("stream index must be non-negative")

    def child(self, j: int) -> RngStream:
        return RngStream(self.seed, self.index, self.key + (int(j),))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.index, *self.key))
        return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def sample_mvnormal(mean, scale: float, n: int, rng) -> np.ndarray:
    """Draw ``n`` rows from N(mean, scale * I).

    ``scale`` multiplies the identity covariance, so each coordinate has
    variance ``scale``.
    """
    if not scale > 0:
        raise DomainError(f"scale must be positive, got {scale!r}")
    if n < 1:
        raise DomainError("n must be at least 1")
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    gen = as_generator(rng)
    z = gen.standard_normal((n, mean.shape[0]))
    return mean + math.sqrt(scale) * z


def sample_mvt(df: int, scale: float, dim: int, n: int, rng) -> np.ndarray:
    """Draw ``n`` rows of a centred multivariate t with shape ``scale * I``.

    Each row is ``sqrt(scale) * Z / sqrt(W / df)`` with one chi-square ``W``
    shared across the coordinates of that row.
    """
    if df < 3:
        raise DomainError(f"t degrees of freedom must be at least 3 for finite variance, got {df!r}")
    if not scale > 0:
        raise DomainError(f"scale must be positive, got {scale!r}")
    if n < 1 or dim < 1:
        raise DomainError("n and dim must be at least 1")
    gen = as_generator(rng)
    z = gen.standard_normal((n, dim))
    w = gen.chisquare(df, size=n)
    return math.sqrt(scale) * z / np.sqrt(w / df)[:, None]


def sample_mvexp(rate: float, dim: int, n: int, rng) -> np.ndarray:
    """Draw ``n`` rows with independent exponential(rate) coordinates.

    ``rate`` is the inverse mean.
    """
    if not rate > 0:
        raise DomainError(f"rate must be positive, got {rate!r}")
    if n < 1 or dim < 1:
        raise DomainError("n and dim must be at least 1")
    gen = as_generator(rng)
    out = gen.exponential(1.0 / rate, size=(n, dim))
    # numpy's exponential can return exactly 0.0 with tiny probability
    np.maximum(out, np.finfo(float).tiny, out=out)
    return out
