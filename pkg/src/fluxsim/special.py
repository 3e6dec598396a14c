"""Scalar numerics: complementary error function and golden-section search.

erfc is implemented directly (Maclaurin series for small arguments, Lentz
continued fraction for large ones) so the readout error path does not depend
on an external special-function library and can be regression-tested against
an independent high-precision series.
"""

import math

from .errors import BracketingError

_INV_SQRT_PI = 1.0 / math.sqrt(math.pi)
_SERIES_CUTOFF = 2.0


def erf_series(x, max_terms=200):
    """Maclaurin series for erf(x); accurate in double precision for |x| <~ 3."""
    term = x
    total = x
    x2 = x * x
    for k in range(1, max_terms):
        term *= -x2 / k
        contrib = term / (2 * k + 1)
        total += contrib
        if abs(contrib) < 1e-18 * max(1.0, abs(total)):
            break
    return 2.0 * _INV_SQRT_PI * total


def _erfc_cf(x, max_iter=300):
    """Continued fraction erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + 1/(2x + 2/(x + ...)))
    for x > 0, evaluated with the modified Lentz algorithm."""
    tiny = 1e-300
    f = x if x != 0.0 else tiny
    c = f
    d = 0.0
    for n in range(1, max_iter):
        # coefficients alternate: a_n = n/2, b_n = x for odd n, 2x pattern folded
        a = 0.5 * n
        b = x
        d = b + a * d
        if d == 0.0:
            d = tiny
        c = b + a / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-17:
            break
    return math.exp(-x * x) * _INV_SQRT_PI / f


def erfc(x):
    """Complementary error function, absolute error < 1e-12 over the real line."""
    if x != x:  # NaN
        return x
    if x >= 0.0:
        if x < _SERIES_CUTOFF:
            return 1.0 - erf_series(x)
        if x > 27.0:
            return 0.0  # below double-precision underflow of exp(-x^2)
        return _erfc_cf(x)
    return 2.0 - erfc(-x)


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_minimize(f, a, b, xtol=1e-6, require_interior=False):
    """Minimize a unimodal scalar function on [a, b].

    Returns (x_min, f_min). With require_interior=True, raises BracketingError
    if the minimum sits at (within xtol of) a window edge, i.e. the window did
    not bracket an interior minimum.
    """
    if not b > a:
        raise BracketingError(f"empty search window [{a}, {b}]")
    lo, hi = a, b
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > xtol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = f(x2)
    x_min, f_min = (x1, f1) if f1 <= f2 else (x2, f2)
    if require_interior and (x_min - a < 2 * xtol or b - x_min < 2 * xtol):
        raise BracketingError(
            f"minimum at {x_min} sits on the edge of [{a}, {b}]; no interior bracket"
        )
    return x_min, f_min
