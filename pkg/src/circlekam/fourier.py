"""Trigonometric polynomials with ball coefficients and a rigorous radix-2 FFT.

Coefficients are python-flint ``acb`` balls so that the working precision can
be raised well beyond double when the strip weights e^{2 pi |k| rho} would
otherwise swamp the rounding errors.  Public accessors hand back
``ComplexInterval`` values with float endpoints.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from decimal import Decimal, Context, ROUND_CEILING, ROUND_FLOOR
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

from flint import acb, arb, ctx, fmpq

from .interval import ComplexInterval, Interval, IntervalError, as_interval, from_arb, to_arb

DEFAULT_PREC = 256


@contextmanager
def precision(bits: int) -> Iterator[None]:
    """Temporarily set the ball-arithmetic working precision."""
    old = ctx.prec
    ctx.prec = bits
    try:
        yield
    finally:
        ctx.prec = old


def _check_pow2(n: int) -> None:
    if n < 2 or n & (n - 1):
        raise ValueError(f"size must be a power of two >= 2, got {n}")


def freq(i: int, n: int) -> int:
    """Frequency stored at FFT-order slot i."""
    return i if i < n // 2 else i - n


def arb_pi() -> arb:
    return arb.pi()


def as_arb(x: "Interval | float | int | arb") -> arb:
    if isinstance(x, arb):
        return x
    return to_arb(as_interval(x))


def as_acb(z: "ComplexInterval | complex | float | acb | arb") -> acb:
    if isinstance(z, acb):
        return z
    if isinstance(z, arb):
        return acb(z)
    if isinstance(z, ComplexInterval):
        return acb(to_arb(z.re), to_arb(z.im))
    z = complex(z)
    return acb(z.real, z.imag)


def acb_to_complex_interval(z: acb) -> ComplexInterval:
    return ComplexInterval(from_arb(z.real), from_arb(z.imag))


# ---------------------------------------------------------------- FFT
_TWIDDLES: dict[tuple[int, int], list[acb]] = {}


def _twiddles(n: int) -> list[acb]:
    """w_j = e^{-2 pi i j/n}, j < n/2, from exact rational multiples of pi."""
    key = (n, ctx.prec)
    tw = _TWIDDLES.get(key)
    if tw is None:
        tw = []
        for j in range(n // 2):
            s, c = arb.sin_cos_pi_fmpq(fmpq(2 * j, n))
            tw.append(acb(c, -s))
        _TWIDDLES[key] = tw
    return tw


def _bitrev_perm(n: int) -> list[int]:
    bits = n.bit_length() - 1
    return [int(format(i, f"0{bits}b")[::-1], 2) if bits else 0 for i in range(n)]


def fft(values: Sequence[acb], inverse: bool = False) -> list[acb]:
    """Unnormalized radix-2 decimation-in-time transform.

    Forward: X_k = sum_j x_j e^{-2 pi i jk/n}; inverse uses e^{+2 pi i jk/n}.
    """
    n = len(values)
    _check_pow2(n)
    a = [values[i] for i in _bitrev_perm(n)]
    tw = _twiddles(n)
    if inverse:
        tw = [w.conjugate() for w in tw]
    size = 2
    while size <= n:
        half = size // 2
        step = n // size
        for start in range(0, n, size):
            u = a[start]
            v = a[start + half]
            a[start] = u + v
            a[start + half] = u - v
            for j in range(1, half):
                u = a[start + j]
                v = a[start + j + half] * tw[j * step]
                a[start + j] = u + v
                a[start + j + half] = u - v
        size *= 2
    return a


# ---------------------------------------------------------------- types
@dataclass
class GridSamples:
    """Values at the nodes x_j = j/n."""

    n: int
    values: list[acb]

    def __post_init__(self) -> None:
        _check_pow2(self.n)
        if len(self.values) != self.n:
            raise ValueError(f"expected {self.n} samples, got {len(self.values)}")

    @classmethod
    def from_function(cls, f: Callable[[arb], "acb | arb"], n: int) -> "GridSamples":
        return cls(n, [acb(f(arb(fmpq(j, n)))) for j in range(n)])

    def value(self, j: int) -> ComplexInterval:
        return acb_to_complex_interval(self.values[j])

    def max_abs_upper(self) -> arb:
        """Upper bound of max_j |g_j| as an exact arb."""
        m = arb(0)
        for v in self.values:
            u = abs(v).upper()
            if u > m:
                m = u
        return m

    def min_abs_lower(self) -> arb:
        m = None
        for v in self.values:
            low = abs(v).lower()
            if m is None or low < m:
                m = low
        return m


@dataclass
class TrigPoly:
    """sum_{k=-n/2}^{n/2-1} c_k e^{2 pi i k x}; coefficients stored in FFT order."""

    n: int
    coeffs: list[acb]
    real: bool = False
    normalized: bool = False

    def __post_init__(self) -> None:
        _check_pow2(self.n)
        if len(self.coeffs) != self.n:
            raise ValueError(f"expected {self.n} coefficients, got {len(self.coeffs)}")

    # ---- constructors ----
    @classmethod
    def zeros(cls, n: int, real: bool = True) -> "TrigPoly":
        return cls(n, [acb(0)] * n, real=real, normalized=True)

    @classmethod
    def from_dict(cls, n: int, coeffs: dict[int, object], real: bool = False,
                  normalized: bool = False) -> "TrigPoly":
        data = [acb(0)] * n
        for k, v in coeffs.items():
            if not -n // 2 <= k < n // 2:
                raise ValueError(f"frequency {k} outside degree range for n={n}")
            data[k % n] = as_acb(v)
        return cls(n, data, real=real, normalized=normalized)

    @classmethod
    def constant(cls, n: int, c: object) -> "TrigPoly":
        return cls.from_dict(n, {0: c}, real=True)

    # ---- access ----
    def acoeff(self, k: int) -> acb:
        if not -self.n // 2 <= k < self.n // 2:
            return acb(0)
        return self.coeffs[k % self.n]

    def coeff(self, k: int) -> ComplexInterval:
        return acb_to_complex_interval(self.acoeff(k))

    def items(self) -> Iterator[tuple[int, acb]]:
        for i, c in enumerate(self.coeffs):
            yield freq(i, self.n), c

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def check_invariants(self) -> None:
        if self.real:
            if not self.coeffs[self.n // 2].contains(0):
                raise IntervalError("real-analytic polynomial with nonzero -N/2 coefficient")
            for k in range(1, self.n // 2):
                a, b = self.coeffs[k], self.coeffs[self.n - k].conjugate()
                if not a.overlaps(b):
                    raise IntervalError(f"real symmetry broken at k={k}")
        if self.normalized and not self.coeffs[0].contains(0):
            raise IntervalError("normalized polynomial with nonzero average")

    # ---- algebra ----
    def _combine(self, other: "TrigPoly", op: Callable[[acb, acb], acb]) -> "TrigPoly":
        if other.n != self.n:
            raise ValueError("size mismatch")
        return TrigPoly(self.n, [op(a, b) for a, b in zip(self.coeffs, other.coeffs)],
                        real=self.real and other.real,
                        normalized=self.normalized and other.normalized)

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other: "TrigPoly") -> "TrigPoly":
        return self._combine(other, lambda a, b: a - b)

    def __neg__(self) -> "TrigPoly":
        return TrigPoly(self.n, [-c for c in self.coeffs], self.real, self.normalized)

    def scale(self, s: "arb | acb | Interval | float") -> "TrigPoly":
        s_ball = s if isinstance(s, (arb, acb)) else as_arb(s)
        real = self.real and not isinstance(s_ball, acb)
        return TrigPoly(self.n, [c * s_ball for c in self.coeffs], real, self.normalized)

    def add_constant(self, c: "arb | acb | float") -> "TrigPoly":
        data = list(self.coeffs)
        data[0] = data[0] + c
        return TrigPoly(self.n, data, self.real, False)

    def derivative(self, order: int = 1) -> "TrigPoly":
        """d^order/dx^order: coefficient k times (2 pi i k)^order."""
        if order == 0:
            return self
        two_pi = 2 * arb.pi()
        data = []
        for i, c in enumerate(self.coeffs):
            k = freq(i, self.n)
            if k == 0 or c.is_zero():
                data.append(acb(0))
            else:
                data.append(c * acb(0, two_pi * k) ** order)
        return TrigPoly(self.n, data, self.real, True)

    def twist(self, t: "arb | Interval | float") -> "TrigPoly":
        """Shift in x: returns x -> p(x + t) for real (interval) t."""
        t_ball = as_arb(t)
        data = []
        for i, c in enumerate(self.coeffs):
            k = freq(i, self.n)
            if k == 0 or c.is_zero():
                data.append(c)
            else:
                data.append(c * acb.exp_pi_i(acb(2 * k * t_ball)))
        return TrigPoly(self.n, data, self.real, self.normalized)

    def resized(self, n: int) -> "TrigPoly":
        """Zero-pad or truncate to size n (truncation drops frequencies)."""
        _check_pow2(n)
        out = [acb(0)] * n
        for k, c in self.items():
            if -n // 2 < k < n // 2 or (k == -n // 2 and not self.real):
                out[k % n] = c
        return TrigPoly(n, out, self.real, self.normalized)

    def midpoint(self) -> "TrigPoly":
        return TrigPoly(self.n, [acb(c.mid()) for c in self.coeffs], self.real, self.normalized)

    def evaluate(self, x: "acb | arb | complex") -> acb:
        """Direct (O(n)) evaluation at a complex point."""
        x_ball = as_acb(x)
        total = acb(0)
        for k, c in self.items():
            if not c.is_zero():
                total += c * acb.exp_pi_i(2 * k * x_ball)
        return total

    # ---- serialization ----
    def to_text(self, digits: int = 17) -> str:
        lines = [f"N {self.n} REAL {1 if self.real else 0}"]
        for k in range(-self.n // 2, self.n // 2):
            c = self.coeffs[k % self.n]
            parts = [_fmt(c.real.lower(), digits, ROUND_FLOOR), _fmt(c.real.upper(), digits, ROUND_CEILING),
                     _fmt(c.imag.lower(), digits, ROUND_FLOOR), _fmt(c.imag.upper(), digits, ROUND_CEILING)]
            lines.append(f"{k} " + " ".join(parts))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str | Iterable[str]) -> "TrigPoly":
        lines = text.splitlines() if isinstance(text, str) else list(text)
        lines = [ln for ln in lines if ln.strip()]
        head = lines[0].split()
        if len(head) != 4 or head[0] != "N" or head[2] != "REAL":
            raise ValueError(f"bad TrigPoly header: {lines[0]!r}")
        n = int(head[1])
        real = head[3] == "1"
        data = [acb(0)] * n
        for ln in lines[1:1 + n]:
            k_s, rlo, rhi, ilo, ihi = ln.split()
            data[int(k_s) % n] = acb(_ball(rlo, rhi), _ball(ilo, ihi))
        return cls(n, data, real=real, normalized=data[0].is_zero())


def _arf_fraction(x: arb) -> Fraction:
    """Exact value of an exact arb (such as x.lower())."""
    m, e = x.man_exp()
    m, e = int(m), int(e)
    return Fraction(m * 2**e) if e >= 0 else Fraction(m, 2**-e)


def _fmt(x: arb, digits: int, rounding: str) -> str:
    fr = _arf_fraction(x)
    if fr == 0:
        return "0"
    dctx = Context(prec=digits, rounding=rounding)
    d = dctx.divide(Decimal(fr.numerator), Decimal(fr.denominator))
    return f"{d:.{digits - 1}e}"


def _ball(lo: str, hi: str) -> arb:
    a = _exact_decimal(lo)
    b = _exact_decimal(hi)
    if a == b:
        return a
    return a.union(b)


def _exact_decimal(s: str) -> arb:
    fr = Fraction(s)
    return arb(fmpq(fr.numerator, fr.denominator))


# ---------------------------------------------------------------- transforms
def dft(samples: GridSamples) -> TrigPoly:
    """Coefficients g~_k = (1/n) sum_j g_j e^{-2 pi i jk/n} in FFT order."""
    n = samples.n
    out = fft(samples.values)
    inv_n = arb(fmpq(1, n))
    return TrigPoly(n, [c * inv_n for c in out])


def idft(poly: TrigPoly) -> GridSamples:
    """Samples g_j = sum_k c_k e^{2 pi i jk/n}.

    The -n/2 slot is treated as frequency -n/2; for real-analytic data it is
    zero so the aliasing between +n/2 and -n/2 never matters.
    """
    return GridSamples(poly.n, fft(poly.coeffs, inverse=True))


def _exp_weights(n: int, rho: arb, sign: int = 1) -> list[arb]:
    """e^{sign * 2 pi |k| rho} for k = 0..n/2."""
    base = 2 * arb.pi() * rho * sign
    return [(base * k).exp() for k in range(n // 2 + 1)]


def strip_boundary_samples(poly: TrigPoly, rho: "Interval | float | arb") -> GridSamples:
    """Samples of p(x_j + i rho): coefficient k twisted by e^{-2 pi k rho}, then idft."""
    rho_b = as_arb(rho)
    n = poly.n
    base = -2 * arb.pi() * rho_b
    data = []
    for i, c in enumerate(poly.coeffs):
        k = freq(i, n)
        data.append(c if k == 0 or c.is_zero() else c * (base * k).exp())
    return idft(TrigPoly(n, data))


# ---------------------------------------------------------------- norms
def fourier_norm_arb(poly: TrigPoly, rho: "Interval | float | arb") -> arb:
    rho_b = as_arb(rho)
    n = poly.n
    weights = _exp_weights(n, rho_b)
    total = arb(0)
    for i, c in enumerate(poly.coeffs):
        if c.is_zero():
            continue
        total += abs(c) * weights[abs(freq(i, n))]
    return total


def fourier_norm(poly: TrigPoly, rho: "Interval | float | arb") -> Interval:
    """Enclosure of sum_k |c_k| e^{2 pi |k| rho}; its upper end bounds the sup on the strip."""
    val = from_arb(fourier_norm_arb(poly, rho))
    return Interval(max(val.lo, 0.0), val.hi)


def _upper_interval(x: arb) -> Interval:
    val = from_arb(x)
    return Interval(max(val.lo, 0.0), max(val.hi, 0.0))


def aliasing_coefficient_bound_arb(k: int, n: int, rho_t: arb) -> arb:
    q = (-2 * arb.pi() * rho_t * n).exp()
    t = 2 * arb.pi() * rho_t * k
    return q / (1 - q) * (t.exp() + (-t).exp())


def aliasing_coefficient_bound(k: int, n: int, rho_t: "Interval | float") -> Interval:
    """s_N(k, rho~) = e^{-2 pi rho~ N}/(1 - e^{-2 pi rho~ N}) (e^{2 pi rho~ k} + e^{-2 pi rho~ k}).

    Values below the double range come back as [0, smallest subnormal].
    """
    _check_pow2(n)
    rho_t = as_interval(rho_t)
    if rho_t.lo <= 0.0:
        raise ValueError("rho_t must be positive")
    if abs(k) > n // 2:
        raise ValueError("|k| must be at most n/2")
    return _upper_interval(aliasing_coefficient_bound_arb(k, n, to_arb(rho_t)))


def dft_function_error_bound_arb(rho: arb, rho_t: arb, n: int) -> arb:
    """C_N(rho, rho~) = S1 + S2 + S3 as balls; +inf when rho = rho~."""
    pi = arb.pi()
    q = (-2 * pi * rho_t * n).exp()
    pref = q / (1 - q)
    s = rho_t + rho
    d = rho_t - rho
    es = (-2 * pi * s).exp()
    s1 = pref * (es + 1) / (es - 1) * (1 - (pi * s * n).exp())
    if d.contains(0):
        # S3 has a pole at rho = rho~
        return arb.pos_inf()
    ed = (2 * pi * d).exp()
    coth = (ed + 1) / (ed - 1)
    s2 = pref * coth * (1 - (-pi * d * n).exp())
    s3 = coth * (-pi * d * n).exp()
    return s1 + s2 + s3


def dft_function_error_bound(rho: "Interval | float", rho_t: "Interval | float", n: int) -> Interval:
    """Upper enclosure of C_N(rho, rho~); the upper end is +inf for rho = rho~."""
    _check_pow2(n)
    rho = as_interval(rho)
    rho_t = as_interval(rho_t)
    if rho_t.lo <= 0.0:
        raise ValueError("rho_t must be positive")
    if rho.lo < 0.0:
        raise ValueError("rho must be nonnegative")
    if rho.lo > rho_t.hi:
        raise ValueError("rho must not exceed rho_t")
    val = dft_function_error_bound_arb(to_arb(rho), to_arb(rho_t), n)
    if not val.is_finite():
        return Interval(0.0, math.inf)
    return _upper_interval(val)
