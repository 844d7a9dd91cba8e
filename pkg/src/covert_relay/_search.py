"""Scalar golden-section maximization on a closed interval."""

from __future__ import annotations

import math

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def golden_max(f, lo: float, hi: float, tol: float = 1e-9) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``.

    The bracket shrinks by the inverse golden ratio per evaluation; the
    endpoints are also checked so monotone objectives resolve to the
    boundary.  ``tol`` is absolute on ``x``.
    """
    if hi < lo:
        raise ValueError("empty interval")
    if hi == lo:
        return lo, f(lo)
    a, b = lo, hi
    h = b - a
    c, d = a + _INVPHI2 * h, a + _INVPHI * h
    fc, fd = f(c), f(d)
    while h > tol:
        h *= _INVPHI
        if fc >= fd:
            b, d, fd = d, c, fc
            c = a + _INVPHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * h
            fd = f(d)
    candidates = [(c, fc), (d, fd), (lo, f(lo)), (hi, f(hi))]
    return max(candidates, key=lambda t: t[1])
