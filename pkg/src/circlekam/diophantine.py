"""Russmann constants and certified measure of Diophantine rotation numbers.

The resonant sets are |theta - p/q| < gamma/q^{tau+1}.  For a fixed q at most
four numerators can be clipped by the ends of B, all others contribute the
full width 2*gamma/q^{tau+1}; those are counted with an inclusion-exclusion
coprime count so the cost is O(Q) rather than O(|B| Q^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

from .interval import (Interval, PI, add_down_up, as_interval, div_down_up, mul_down_up,
                       next_up, power, sqrt)
from .special import gamma_fn, hurwitz_zeta, riemann_zeta

Q_MIN = 1024
Q_REFINE_CAP = 2**17


@dataclass(frozen=True)
class RotationInterval:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError(f"empty rotation interval [{self.lo}, {self.hi}]")

    @property
    def theta0(self) -> float:
        return self.lo / 2 + self.hi / 2

    @property
    def width(self) -> Interval:
        return Interval(self.hi) - Interval(self.lo)

    @property
    def rad(self) -> float:
        return (self.hi - self.lo) / 2

    def split(self) -> tuple["RotationInterval", "RotationInterval"]:
        m = self.theta0
        if not self.lo < m < self.hi or Fraction(m) * 2 != Fraction(self.lo) + Fraction(self.hi):
            raise ValueError("interval too narrow for an exact midpoint split")
        return RotationInterval(self.lo, m), RotationInterval(m, self.hi)


@dataclass(frozen=True)
class DiophantineParams:
    gamma: Interval
    tau: Interval
    relative_measure_lb: Interval
    q_max: int = 0


def russmann_constant(tau: Interval | float) -> Interval:
    """c_R = sqrt(zeta(2, 2^tau) Gamma(2 tau + 1)) / (2 (2 pi)^tau)."""
    tau = as_interval(tau)
    if tau.lo < 1.0:
        raise ValueError("tau must be >= 1")
    z = hurwitz_zeta(Interval(2.0), power(Interval(2.0), tau))
    g = gamma_fn(tau * 2 + 1)
    return sqrt(z * g) / (power(PI * 2, tau) * 2)


def lipschitz_russmann_constant(tau: Interval | float) -> Interval:
    """c^_R = tau^{-2 tau} (2 tau + 1)^{2 tau + 1} c_R^2."""
    tau = as_interval(tau)
    c = russmann_constant(tau)
    return power(tau, -tau * 2) * power(tau * 2 + 1, tau * 2 + 1) * c.sqr()


def _resonance_halfwidth(q: int, gamma: Interval, tau: Interval) -> Interval:
    if gamma.hi == 0.0:
        return Interval(0.0)
    return gamma / power(Interval(float(q)), tau + 1)


def _delta(p: int, q: int, lo_q: int, hi_q: int, B: RotationInterval, w: Interval) -> Interval:
    """The three-case clipped overlap, evaluated outward."""
    c = Interval(Fraction(p, q))
    if p == lo_q:
        val = (c + w - B.lo).max(0.0)
    elif p == hi_q:
        val = (Interval(B.hi) - c + w).max(0.0)
    else:
        val = (c + w).min(B.hi) - (c - w).max(B.lo)
    return val


def resonance_overlap(p: int, q: int, B: RotationInterval, gamma: Interval | float,
                      tau: Interval | float) -> Interval:
    """Delta(p, q): upper bound of Leb of the (p, q) resonance clipped to B."""
    if q < 1 or math.gcd(p, q) != 1:
        raise ValueError("need q >= 1 and gcd(p, q) = 1")
    gamma, tau = as_interval(gamma), as_interval(tau)
    lo_q = math.floor(Fraction(B.lo) * q)
    hi_q = math.ceil(Fraction(B.hi) * q)
    if not lo_q <= p <= hi_q:
        return Interval(0.0)
    return _delta(p, q, lo_q, hi_q, B, _resonance_halfwidth(q, gamma, tau))


@lru_cache(maxsize=1 << 16)
def _prime_factors(q: int) -> tuple[int, ...]:
    out = []
    d = 2
    while d * d <= q:
        if q % d == 0:
            out.append(d)
            while q % d == 0:
                q //= d
        d += 1
    if q > 1:
        out.append(q)
    return tuple(out)


def coprime_count(q: int, a: int, b: int) -> int:
    """#{p in [a, b] : gcd(p, q) = 1}."""
    if b < a:
        return 0
    total = 0
    primes = _prime_factors(q)
    for r in range(len(primes) + 1):
        sign = -1 if r % 2 else 1
        for combo in combinations(primes, r):
            d = math.prod(combo)
            total += sign * (b // d - (a - 1) // d)
    return total


def _inv_powers(Q: int, s: Interval) -> list[float]:
    """Upper bounds of q^{-s} for q = 0..Q (slot 0 unused).

    q >= 1 makes q^{-s} non-increasing in s, so s.lo gives the upper end;
    two ulps absorb the libm pow error.
    """
    out = _INV_POW_CACHE.setdefault(s.lo, [0.0])
    for q in range(len(out), Q + 1):
        out.append(next_up(next_up(math.pow(q, -s.lo))))
    return out


_INV_POW_CACHE: dict = {}
_MID_CACHE: dict = {}


def _ratio_bounds(p: int, q: int) -> tuple[float, float]:
    return div_down_up(float(p), float(q))


def _edge_overlap_hi(p: int, q: int, lo_q: int, hi_q: int, B: RotationInterval, w: float) -> float:
    """Upper bound of the three-case Delta for one numerator, w an upper bound of the half width."""
    c_lo, c_hi = _ratio_bounds(p, q)
    if p == lo_q:
        return max(add_down_up(add_down_up(c_hi, w)[1], -B.lo)[1], 0.0)
    if p == hi_q:
        return max(add_down_up(add_down_up(B.hi, -c_lo)[1], w)[1], 0.0)
    top = min(B.hi, add_down_up(c_hi, w)[1])
    bot = max(B.lo, add_down_up(c_lo, -w)[0])
    return max(add_down_up(top, -bot)[1], 0.0)


def _bounds_q(B: RotationInterval, q: int) -> tuple[int, int]:
    """(floor(lo q), ceil(hi q)) in exact integer arithmetic."""
    lo_n, lo_d = B.lo.as_integer_ratio()
    hi_n, hi_d = B.hi.as_integer_ratio()
    return (lo_n * q) // lo_d, -((-hi_n * q) // hi_d)


def _middle_sum(B: RotationInterval, tau: Interval, Q: int) -> float:
    """Upper bound of sum_q 2 n_mid(q) q^{-tau-1}: the gamma-free full-width part."""
    key = (B.lo, B.hi, tau.lo, tau.hi, Q)
    hit = _MID_CACHE.get(key)
    if hit is not None:
        return hit
    inv = _inv_powers(Q, tau + 1)
    total = 0.0
    for q in range(1, Q + 1):
        lo_q, hi_q = _bounds_q(B, q)
        n_mid = coprime_count(q, lo_q + 2, hi_q - 2)
        if n_mid:
            total = add_down_up(total, mul_down_up(2.0 * n_mid, inv[q])[1])[1]
    _MID_CACHE[key] = total
    return total


def resonance_sum(B: RotationInterval, gamma: Interval, tau: Interval, Q: int) -> Interval:
    """Upper bound of sum_{q<=Q} sum_p Delta(p, q) over coprime p in [floor(lo q), ceil(hi q)].

    Returned as [0, bound]; only the upper end is meaningful.
    """
    if gamma.hi == 0.0:
        return Interval(0.0)
    inv = _inv_powers(Q, tau + 1)
    g = gamma.hi
    total = mul_down_up(g, _middle_sum(B, tau, Q))[1]
    for q in range(1, Q + 1):
        lo_q, hi_q = _bounds_q(B, q)
        w = mul_down_up(g, inv[q])[1]
        for p in sorted({lo_q, lo_q + 1, hi_q - 1, hi_q}):
            if p < lo_q or p > hi_q or math.gcd(p, q) != 1:
                continue
            total = add_down_up(total, _edge_overlap_hi(p, q, lo_q, hi_q, B, w))[1]
    return Interval(0.0, total)


def tail_term(gamma: Interval, tau: Interval, Q: int) -> Interval:
    return gamma * 4 / ((tau - 1) * power(Interval(float(Q)), tau - 1))


def default_q(B: RotationInterval) -> int:
    """Smallest power of two Q >= 1024 with 2/Q <= |B|."""
    width = B.width.lo
    Q = Q_MIN
    while 2.0 / Q > width:
        Q *= 2
    return Q


def diophantine_measure_lb(B: RotationInterval, gamma: Interval | float, tau: Interval | float,
                           Q: int) -> Interval:
    """Certified lower bound of Leb(B cap D(gamma, tau)) / Leb(B).

    The clipped resonance lengths are absolute, so their sum is divided by
    |B| to obtain a relative quantity.
    """
    gamma, tau = as_interval(gamma), as_interval(tau)
    if gamma.hi >= 0.5:
        raise ValueError("gamma must be below 1/2")
    if tau.lo <= 1.0:
        raise ValueError("tau must exceed 1")
    if Interval(2.0) / Q > B.width:
        raise ValueError(f"Q={Q} violates 2/Q <= |B|")
    if gamma.hi == 0.0:
        return Interval(1.0)
    res = resonance_sum(B, gamma, tau, Q).upper()
    val = 1 - tail_term(gamma, tau, Q) - res / B.width.lower()
    lo = min(max(val.lo, 0.0), 1.0)
    return Interval(lo, lo)


def refine_measure(B: RotationInterval, gamma: Interval, tau: Interval, Q: int,
                   q_cap: int = Q_REFINE_CAP) -> tuple[Interval, int]:
    """Double Q while the tail term exceeds 10% of the deficit and the bound improves."""
    best = diophantine_measure_lb(B, gamma, tau, Q)
    best_q = Q
    while best_q * 2 <= q_cap:
        deficit = 1 - best.lo
        if tail_term(gamma, tau, best_q).hi <= 0.1 * deficit:
            break
        cand = diophantine_measure_lb(B, gamma, tau, best_q * 2)
        if cand.lo <= best.lo:
            break
        best, best_q = cand, best_q * 2
    return best, best_q


def select_gamma(B: RotationInterval, tau: Interval | float, target: float, Q: int | None = None,
                 refine: bool = True) -> DiophantineParams:
    """Largest gamma = 2^-j whose certified relative measure meets target.

    gamma is chosen at the base Q; with refine=True the reported measure is
    then tightened by raising Q (which never changes the chosen gamma).
    """
    if not 0.0 < target < 1.0:
        raise ValueError("target must lie in (0, 1)")
    tau = as_interval(tau)
    q0 = default_q(B) if Q is None else Q
    for j in range(2, 61):
        gamma = Interval(2.0 ** -j)
        lb = diophantine_measure_lb(B, gamma, tau, q0)
        if lb.lo >= target:
            q_used = q0
            if refine and Q is None:
                lb, q_used = refine_measure(B, gamma, tau, q0)
            return DiophantineParams(gamma, tau, lb, q_used)
    raise ValueError(f"no gamma >= 2^-60 reaches relative measure {target} on {B}")


def dirichlet_limit(gamma: Interval | float, tau: Interval | float) -> Interval:
    """1 - 2 gamma zeta(tau) / zeta(tau + 1), the Q -> infinity bound for B = [0, 1]."""
    gamma, tau = as_interval(gamma), as_interval(tau)
    return 1 - gamma * 2 * riemann_zeta(tau) / riemann_zeta(tau + 1)
