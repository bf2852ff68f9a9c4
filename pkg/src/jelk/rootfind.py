"""Bracketed scalar root finding."""

import math
import sys

from .errors import ConvergenceError, DomainError

_EPS = sys.float_info.epsilon


def brentq(f, a, b, xtol=2e-12, rtol=4 * _EPS, maxiter=200, fa=None, fb=None):
    """Find a root of ``f`` in ``[a, b]`` with Brent's method.

    ``f(a)`` and ``f(b)`` must differ in sign.  Returns ``(root, iterations)``.
    The iteration combines bisection, secant and inverse quadratic steps and
    never leaves the current bracket.

    Raises:
        DomainError: if the endpoints do not bracket a sign change.
        ConvergenceError: if ``maxiter`` steps do not shrink the bracket
            below ``xtol + rtol * |x|``.
    """
    xpre, xcur = float(a), float(b)
    fpre = f(xpre) if fa is None else fa
    fcur = f(xcur) if fb is None else fb
    if math.isnan(fpre) or math.isnan(fcur):
        raise DomainError("function is NaN at a bracket endpoint")
    if fpre * fcur > 0:
        raise DomainError(f"no sign change on [{a!r}, {b!r}]: f = ({fpre!r}, {fcur!r})")
    if fpre == 0:
        return xpre, 0
    if fcur == 0:
        return xcur, 0

    xblk = fblk = spre = scur = 0.0
    for it in range(1, maxiter + 1):
        if fpre * fcur < 0:
            xblk, fblk = xpre, fpre
            spre = scur = xcur - xpre
        if abs(fblk) < abs(fcur):
            xpre, xcur, xblk = xcur, xblk, xcur
            fpre, fcur, fblk = fcur, fblk, fcur

        delta = 0.5 * (xtol + rtol * abs(xcur))
        sbis = 0.5 * (xblk - xcur)
        if fcur == 0 or abs(sbis) < delta:
            return xcur, it

        if abs(spre) > delta and abs(fcur) < abs(fpre):
            if xpre == xblk:
                stry = -fcur * (xcur - xpre) / (fcur - fpre)
            else:
                dpre = (fpre - fcur) / (xpre - xcur)
                dblk = (fblk - fcur) / (xblk - xcur)
                stry = -fcur * (fblk * dblk - fpre * dpre) / (dblk * dpre * (fblk - fpre))
            if 2 * abs(stry) < min(abs(spre), 3 * abs(sbis) - delta):
                spre, scur = scur, stry
            else:
                spre = scur = sbis
        else:
            spre = scur = sbis

        xpre, fpre = xcur, fcur
        if abs(scur) > delta:
            xcur += scur
        else:
            xcur += delta if sbis > 0 else -delta
        fcur = f(xcur)

    lo, hi = sorted((xcur, xblk))
    raise ConvergenceError(
        f"brentq did not converge in {maxiter} iterations",
        bracket=(lo, hi),
        diagnostics={"f": fcur},
    )
