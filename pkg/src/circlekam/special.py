"""Rigorous enclosures of the Hurwitz zeta and Gamma functions.

Both use an asymptotic expansion whose remainder is bounded by the first
omitted term (Euler-Maclaurin for zeta, Stirling for log-Gamma).  The
Bernoulli numbers are exact rationals.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb

from .interval import Interval, IntervalError, as_interval, exp, log, PI

_GAMMA_ARGMIN_LO = 1.4616  # Gamma decreases on (0, x0], x0 = 1.46163...
_GAMMA_ARGMIN_HI = 1.4617
_GAMMA_MIN_LB = 0.8856  # min Gamma = 0.885603...


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """B_n with the convention B_1 = -1/2."""
    b = [Fraction(1)]
    for m in range(1, n + 1):
        b.append(-sum(comb(m + 1, k) * b[k] for k in range(m)) / Fraction(m + 1))
    return b[n]


def _hurwitz_point(s: Interval, a: Interval, n_terms: int = 24, k_terms: int = 12) -> Interval:
    total = Interval(0.0)
    for n in range(n_terms):
        total = total + exp(-s * log(a + n))
    x = a + n_terms
    logx = log(x)
    total = total + exp((1 - s) * logx) / (s - 1) + exp(-s * logx) / 2
    poch = s  # s(s+1)...(s+2k-2)
    fact = 2  # (2k)!
    for k in range(1, k_terms + 2):
        if k > 1:
            poch = poch * (s + (2 * k - 3)) * (s + (2 * k - 2))
            fact *= (2 * k - 1) * (2 * k)
        term = Interval(bernoulli(2 * k) / fact) * poch * exp(-(s + (2 * k - 1)) * logx)
        if k <= k_terms:
            total = total + term
        else:
            bound = abs(term).hi
            total = total + Interval(-bound, bound)
    return total


def hurwitz_zeta(s: Interval | float, a: Interval | float) -> Interval:
    """Enclosure of zeta(s, a) = sum_{n>=0} (n+a)^{-s} for real s > 1, a > 0."""
    s = as_interval(s)
    a = as_interval(a)
    if s.lo <= 1.0:
        raise IntervalError(f"hurwitz_zeta needs s > 1, got {s!r}")
    if a.lo <= 0.0:
        raise IntervalError(f"hurwitz_zeta needs a > 0, got {a!r}")
    if s.is_point() and a.is_point():
        return _hurwitz_point(s, a)
    if a.lo >= 1.0:
        # every (n+a) >= 1, so the sum decreases in both s and a
        hi = _hurwitz_point(s.lower(), a.lower()).hi
        lo = _hurwitz_point(s.upper(), a.upper()).lo
        return Interval(lo, hi)
    return _hurwitz_point(s, a)


def riemann_zeta(s: Interval | float) -> Interval:
    return hurwitz_zeta(s, Interval(1.0))


def _log_gamma_stirling(x: Interval, k_terms: int = 12) -> Interval:
    half_log_2pi = log(PI * 2) / 2
    total = (x - 0.5) * log(x) - x + half_log_2pi
    xpow = x
    x2 = x * x
    for k in range(1, k_terms + 2):
        if k > 1:
            xpow = xpow * x2
        term = Interval(bernoulli(2 * k) / (2 * k * (2 * k - 1))) / xpow
        if k <= k_terms:
            total = total + term
        else:
            bound = abs(term).hi
            total = total + Interval(-bound, bound)
    return total


def _gamma_point(x: Interval) -> Interval:
    shift = 0
    rising = Interval(1.0)
    y = x
    while y.lo < 12.0:
        rising = rising * y
        y = y + 1
        shift += 1
    g = exp(_log_gamma_stirling(y))
    return g / rising if shift else g


def gamma_fn(x: Interval | float) -> Interval:
    """Enclosure of Gamma(x) for x > 0."""
    x = as_interval(x)
    if x.lo <= 0.0:
        raise IntervalError(f"gamma_fn needs x > 0, got {x!r}")
    if x.is_point():
        return _gamma_point(x)
    if x.lo >= _GAMMA_ARGMIN_HI:
        return Interval(_gamma_point(x.lower()).lo, _gamma_point(x.upper()).hi)
    if x.hi <= _GAMMA_ARGMIN_LO:
        return Interval(_gamma_point(x.upper()).lo, _gamma_point(x.lower()).hi)
    hi = max(_gamma_point(x.lower()).hi, _gamma_point(x.upper()).hi)
    return Interval(_GAMMA_MIN_LB, hi)
