"""Outward-rounded interval arithmetic on double-precision endpoints.

Python offers no control over the FPU rounding mode, so every operation is
computed in round-to-nearest and then corrected.  For +, -, * and / the
rounding error is recovered exactly with error-free transformations
(TwoSum, Dekker's TwoProduct), which lets exact results stay exact and moves
inexact endpoints by a single ulp in the right direction.  Library functions
(exp, sin, ...) are trusted to one ulp and widened by two.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Union

from flint import arb

Number = Union[int, float, Fraction, "Interval"]

_INF = math.inf
_SPLIT = 134217729.0  # 2**27 + 1
_BIG = 2.0 ** 995
_TINY = 2.0 ** -960


class IntervalError(ArithmeticError):
    """Raised for domain violations such as division by an interval containing 0."""


def next_up(x: float) -> float:
    return math.nextafter(x, _INF)


def next_down(x: float) -> float:
    return math.nextafter(x, -_INF)


def _widen(lo: float, hi: float, ulps: int = 2) -> tuple[float, float]:
    for _ in range(ulps):
        lo, hi = next_down(lo), next_up(hi)
    return lo, hi


def _two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a: float) -> tuple[float, float]:
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a: float, b: float) -> tuple[float, float]:
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _safe_for_dekker(a: float, b: float, p: float) -> bool:
    if not math.isfinite(p):
        return False
    if abs(a) > _BIG or abs(b) > _BIG:
        return False
    # p == 0 with nonzero factors is an underflow; the error term is meaningless then
    return abs(p) > _TINY


def add_down_up(a: float, b: float) -> tuple[float, float]:
    s, err = _two_sum(a, b)
    if not math.isfinite(s) or not math.isfinite(err):
        return next_down(s), next_up(s)
    if err == 0.0:
        return s, s
    return (s, next_up(s)) if err > 0.0 else (next_down(s), s)


def mul_down_up(a: float, b: float) -> tuple[float, float]:
    if a == 0.0 or b == 0.0:
        if math.isinf(a) or math.isinf(b):
            raise IntervalError("0 * inf")
        return 0.0, 0.0
    p = a * b
    if not _safe_for_dekker(a, b, p):
        return next_down(p), next_up(p)
    p, err = _two_prod(a, b)
    if err == 0.0:
        return p, p
    return (p, next_up(p)) if err > 0.0 else (next_down(p), p)


def div_down_up(a: float, b: float) -> tuple[float, float]:
    if a == 0.0:
        return 0.0, 0.0
    q = a / b
    if q == 0.0 or not math.isfinite(q) or not _safe_for_dekker(q, b, a):
        return next_down(q), next_up(q)
    p, err = _two_prod(q, b)
    if not math.isfinite(p):
        return next_down(q), next_up(q)
    # a - q*b = (a - p) - err; a - p is exact by Sterbenz since p ~ a
    d = a - p
    if d == err:
        return q, q
    r_pos = d > err
    true_above = r_pos == (b > 0.0)
    return (q, next_up(q)) if true_above else (next_down(q), q)


def sqrt_down_up(x: float) -> tuple[float, float]:
    if x == 0.0:
        return 0.0, 0.0
    s = math.sqrt(x)
    if math.isinf(s) or not _safe_for_dekker(s, s, x):
        return next_down(s), next_up(s)
    p, err = _two_prod(s, s)
    d = x - p
    if d == err:
        return s, s
    return (s, next_up(s)) if d > err else (next_down(s), s)


def _enclose_fraction(q: Fraction) -> tuple[float, float]:
    f = float(q)
    if math.isinf(f):
        return (next_down(f), f) if f > 0 else (f, next_up(f))
    fq = Fraction(f)
    if fq == q:
        return f, f
    return (next_down(f), f) if fq > q else (f, next_up(f))


class Interval:
    """Closed interval [lo, hi] with float endpoints."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: float | int | Fraction | str, hi: float | int | Fraction | str | None = None):
        if hi is None:
            hi = lo
        lo_f = _lower_of(lo)
        hi_f = _upper_of(hi)
        if math.isnan(lo_f) or math.isnan(hi_f):
            raise IntervalError("NaN endpoint")
        if lo_f > hi_f:
            raise IntervalError(f"empty interval [{lo_f}, {hi_f}]")
        self.lo = lo_f
        self.hi = hi_f

    @classmethod
    def _raw(cls, lo: float, hi: float) -> "Interval":
        obj = object.__new__(cls)
        obj.lo = lo
        obj.hi = hi
        return obj

    @classmethod
    def hull(cls, items: Iterable["Interval | float"]) -> "Interval":
        ivs = [as_interval(v) for v in items]
        return cls._raw(min(v.lo for v in ivs), max(v.hi for v in ivs))

    # ---- inspection ----
    @property
    def mid(self) -> float:
        if self.lo == -self.hi:
            return 0.0
        return self.lo / 2 + self.hi / 2

    @property
    def rad(self) -> float:
        m = self.mid
        return max(add_down_up(self.hi, -m)[1], add_down_up(m, -self.lo)[1])

    @property
    def width(self) -> float:
        return add_down_up(self.hi, -self.lo)[1]

    def mag(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    def mig(self) -> float:
        if self.lo <= 0.0 <= self.hi:
            return 0.0
        return min(abs(self.lo), abs(self.hi))

    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: "float | int | Fraction | Interval") -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        if isinstance(x, Fraction):
            lo_ok = self.lo == -math.inf or Fraction(self.lo) <= x
            return lo_ok and (self.hi == math.inf or x <= Fraction(self.hi))
        return self.lo <= x <= self.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0.0 <= self.hi

    def subset(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def interior_subset(self, other: "Interval") -> bool:
        return other.lo < self.lo and self.hi < other.hi

    def union(self, other: "Interval | float") -> "Interval":
        o = as_interval(other)
        return Interval._raw(min(self.lo, o.lo), max(self.hi, o.hi))

    def intersect(self, other: "Interval") -> "Interval | None":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval._raw(lo, hi) if lo <= hi else None

    def __lt__(self, other: Number) -> bool:  # certainly less
        return self.hi < as_interval(other).lo

    def __gt__(self, other: Number) -> bool:  # certainly greater
        return self.lo > as_interval(other).hi

    def __le__(self, other: Number) -> bool:
        return self.hi <= as_interval(other).lo

    def __ge__(self, other: Number) -> bool:
        return self.lo >= as_interval(other).hi

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, float)):
            other = Interval(other)
        if not isinstance(other, Interval):
            return NotImplemented
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self) -> int:
        return hash((self.lo, self.hi))

    def __repr__(self) -> str:
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __float__(self) -> float:
        return self.mid

    # ---- arithmetic ----
    def __neg__(self) -> "Interval":
        return Interval._raw(-self.hi, -self.lo)

    def __pos__(self) -> "Interval":
        return self

    def __add__(self, other: Number) -> "Interval":
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return Interval._raw(add_down_up(self.lo, o.lo)[0], add_down_up(self.hi, o.hi)[1])

    __radd__ = __add__

    def __sub__(self, other: Number) -> "Interval":
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return Interval._raw(add_down_up(self.lo, -o.hi)[0], add_down_up(self.hi, -o.lo)[1])

    def __rsub__(self, other: Number) -> "Interval":
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other: Number) -> "Interval":
        o = _coerce(other)
        if o is None:
            return NotImplemented
        a, b = self, o
        if a.lo >= 0.0 and b.lo >= 0.0:
            return Interval._raw(mul_down_up(a.lo, b.lo)[0], mul_down_up(a.hi, b.hi)[1])
        los, his = [], []
        for x in (a.lo, a.hi):
            for y in (b.lo, b.hi):
                d, u = mul_down_up(x, y)
                los.append(d)
                his.append(u)
        return Interval._raw(min(los), max(his))

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "Interval":
        o = _coerce(other)
        if o is None:
            return NotImplemented
        if o.lo <= 0.0 <= o.hi:
            raise IntervalError(f"division by interval containing zero: {o!r}")
        los, his = [], []
        for x in (self.lo, self.hi):
            for y in (o.lo, o.hi):
                d, u = div_down_up(x, y)
                los.append(d)
                his.append(u)
        return Interval._raw(min(los), max(his))

    def __rtruediv__(self, other: Number) -> "Interval":
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, n: "int | Interval | float") -> "Interval":
        if isinstance(n, int):
            return _ipow(self, n)
        return power(self, n)

    def __abs__(self) -> "Interval":
        if self.lo >= 0.0:
            return self
        if self.hi <= 0.0:
            return -self
        return Interval._raw(0.0, max(-self.lo, self.hi))

    def sqr(self) -> "Interval":
        a = abs(self)
        return Interval._raw(max(mul_down_up(a.lo, a.lo)[0], 0.0), mul_down_up(a.hi, a.hi)[1])

    def max(self, other: Number) -> "Interval":
        o = as_interval(other)
        return Interval._raw(max(self.lo, o.lo), max(self.hi, o.hi))

    def min(self, other: Number) -> "Interval":
        o = as_interval(other)
        return Interval._raw(min(self.lo, o.lo), min(self.hi, o.hi))

    def upper(self) -> "Interval":
        """The degenerate interval at the upper endpoint."""
        return Interval._raw(self.hi, self.hi)

    def lower(self) -> "Interval":
        return Interval._raw(self.lo, self.lo)


def _lower_of(x: float | int | Fraction | str) -> float:
    if isinstance(x, float):
        return x
    if isinstance(x, str):
        x = Fraction(x)
    if isinstance(x, int):
        x = Fraction(x)
    return _enclose_fraction(x)[0]


def _upper_of(x: float | int | Fraction | str) -> float:
    if isinstance(x, float):
        return x
    if isinstance(x, str):
        x = Fraction(x)
    if isinstance(x, int):
        x = Fraction(x)
    return _enclose_fraction(x)[1]


def _coerce(x: object) -> Interval | None:
    if isinstance(x, Interval):
        return x
    if isinstance(x, (int, float, Fraction)):
        return Interval(x)
    return None


def as_interval(x: Number | str) -> Interval:
    if isinstance(x, Interval):
        return x
    return Interval(x)


def _ipow(x: Interval, n: int) -> Interval:
    if n < 0:
        return 1 / _ipow(x, -n)
    if n == 0:
        return Interval._raw(1.0, 1.0)
    if n % 2 == 0:
        base = abs(x)
    else:
        base = x
    result = Interval._raw(1.0, 1.0)
    sq = base
    k = n
    while k:
        if k & 1:
            result = result * sq
        k >>= 1
        if k:
            sq = sq * sq
    if n % 2 == 0:
        return Interval._raw(max(result.lo, 0.0), result.hi)
    return result


# ---- constants ----
PI = Interval._raw(math.pi, next_up(math.pi))
TWO_PI = PI * 2
HALF_PI = PI / 2
E = Interval._raw(next_down(math.e), math.e)  # float(e) > e


# ---- elementary functions ----
def _mono_inc(f, x: Interval, ulps: int = 2) -> Interval:
    lo = f(x.lo)
    hi = f(x.hi) if x.hi != x.lo else lo
    lo, _ = _widen(lo, lo, ulps)
    _, hi = _widen(hi, hi, ulps)
    return Interval._raw(lo, hi)


def exp(x: Number) -> Interval:
    x = as_interval(x)
    if x.lo == x.hi == 0.0:
        return Interval._raw(1.0, 1.0)
    try:
        r = _mono_inc(math.exp, x)
    except OverflowError:
        lo = math.exp(x.lo) if x.lo < 709.0 else 1.7e308
        r = Interval._raw(next_down(next_down(lo)), _INF)
    return Interval._raw(max(r.lo, 0.0), r.hi)


def log(x: Number) -> Interval:
    x = as_interval(x)
    if x.lo <= 0.0:
        raise IntervalError(f"log of non-positive interval {x!r}")
    return _mono_inc(math.log, x)


def sqrt(x: Number) -> Interval:
    x = as_interval(x)
    if x.lo < 0.0:
        raise IntervalError(f"sqrt of negative interval {x!r}")
    return Interval._raw(sqrt_down_up(x.lo)[0], sqrt_down_up(x.hi)[1])


def sinh(x: Number) -> Interval:
    x = as_interval(x)
    try:
        return _mono_inc(math.sinh, x)
    except OverflowError:
        raise IntervalError("sinh overflow") from None


def cosh(x: Number) -> Interval:
    x = as_interval(x)
    a = abs(x)
    if a.hi == 0.0:
        return Interval._raw(1.0, 1.0)
    try:
        hi = _widen(math.cosh(a.hi), math.cosh(a.hi))[1]
    except OverflowError:
        hi = _INF
    if a.lo == 0.0:
        return Interval._raw(1.0, hi)
    lo = _widen(math.cosh(a.lo), math.cosh(a.lo))[0]
    return Interval._raw(max(lo, 1.0), hi)


def _trig(x: Interval, f, peak_offset: Interval, trough_offset: Interval) -> Interval:
    """Range of a 2*pi-periodic f whose maxima sit at peak_offset + 2*pi*k."""
    if not math.isfinite(x.lo) or not math.isfinite(x.hi) or x.width >= 2 * math.pi:
        return Interval._raw(-1.0, 1.0)
    vals = [f(x.lo), f(x.hi)]
    lo = min(vals)
    hi = max(vals)
    lo, hi = _widen(lo, hi)

    def may_contain(offset: Interval) -> bool:
        k_lo = ((Interval(x.lo) - offset) / TWO_PI).lo
        k_hi = ((Interval(x.hi) - offset) / TWO_PI).hi
        return math.ceil(k_lo) <= math.floor(k_hi)

    if may_contain(peak_offset):
        hi = 1.0
    if may_contain(trough_offset):
        lo = -1.0
    return Interval._raw(max(lo, -1.0), min(hi, 1.0))


def sin(x: Number) -> Interval:
    x = as_interval(x)
    if x.lo == x.hi == 0.0:
        return Interval._raw(0.0, 0.0)
    return _trig(as_interval(x), math.sin, HALF_PI, -HALF_PI)


def cos(x: Number) -> Interval:
    x = as_interval(x)
    if x.lo == x.hi == 0.0:
        return Interval._raw(1.0, 1.0)
    return _trig(as_interval(x), math.cos, Interval(0.0), PI)


def power(x: Number, y: Number) -> Interval:
    """x**y for x > 0 (or integer y)."""
    x = as_interval(x)
    if isinstance(y, int):
        return _ipow(x, y)
    y = as_interval(y)
    if y.is_point() and float(y.lo).is_integer() and abs(y.lo) < 2**31:
        return _ipow(x, int(y.lo))
    if x.lo <= 0.0:
        if x.lo == 0.0 and y.lo > 0.0:
            upper = exp(y * log(Interval(max(x.hi, 5e-324)))) if x.hi > 0 else Interval(0.0)
            return Interval._raw(0.0, upper.hi)
        raise IntervalError(f"pow of non-positive base {x!r}")
    return exp(y * log(x))


def pi() -> Interval:
    return PI


# ---- complex rectangles ----
class ComplexInterval:
    """Rectangular complex interval re + i*im."""

    __slots__ = ("re", "im")

    def __init__(self, re: Number, im: Number = 0.0):
        self.re = as_interval(re)
        self.im = as_interval(im)

    def __repr__(self) -> str:
        return f"ComplexInterval({self.re!r}, {self.im!r})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ComplexInterval):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def contains(self, z: "complex | ComplexInterval") -> bool:
        if isinstance(z, ComplexInterval):
            return self.re.contains(z.re) and self.im.contains(z.im)
        z = complex(z)
        return self.re.contains(z.real) and self.im.contains(z.imag)

    def conjugate(self) -> "ComplexInterval":
        return ComplexInterval(self.re, -self.im)

    def __neg__(self) -> "ComplexInterval":
        return ComplexInterval(-self.re, -self.im)

    def __add__(self, other: "ComplexInterval | Number | complex") -> "ComplexInterval":
        o = _ccoerce(other)
        return ComplexInterval(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other: "ComplexInterval | Number | complex") -> "ComplexInterval":
        o = _ccoerce(other)
        return ComplexInterval(self.re - o.re, self.im - o.im)

    def __rsub__(self, other: "ComplexInterval | Number | complex") -> "ComplexInterval":
        return _ccoerce(other) - self

    def __mul__(self, other: "ComplexInterval | Number | complex") -> "ComplexInterval":
        o = _ccoerce(other)
        return ComplexInterval(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def abs2(self) -> Interval:
        s = self.re.sqr() + self.im.sqr()
        return Interval._raw(max(s.lo, 0.0), s.hi)

    def __abs__(self) -> Interval:
        return sqrt(self.abs2())

    def __truediv__(self, other: "ComplexInterval | Number | complex") -> "ComplexInterval":
        o = _ccoerce(other)
        den = o.abs2()
        num = self * o.conjugate()
        return ComplexInterval(num.re / den, num.im / den)

    def __rtruediv__(self, other: "ComplexInterval | Number | complex") -> "ComplexInterval":
        return _ccoerce(other) / self


def _ccoerce(x: object) -> ComplexInterval:
    if isinstance(x, ComplexInterval):
        return x
    if isinstance(x, complex):
        return ComplexInterval(x.real, x.imag)
    return ComplexInterval(as_interval(x), 0.0)


def cexp_i(t: Number) -> ComplexInterval:
    """e^{i t} for real interval t."""
    t = as_interval(t)
    return ComplexInterval(cos(t), sin(t))


# ---- conversion to and from arb balls ----
def to_arb(x: Number) -> arb:
    x = as_interval(x)
    if x.lo == x.hi:
        return arb(x.lo)
    if not (math.isfinite(x.lo) and math.isfinite(x.hi)):
        raise IntervalError("unbounded interval cannot become an arb ball")
    m = x.mid
    r = max(add_down_up(x.hi, -m)[1], add_down_up(m, -x.lo)[1])
    return arb(m, r)


def from_arb(x: arb) -> Interval:
    """Outward float enclosure of an arb ball."""
    if not x.is_finite():
        raise IntervalError("non-finite arb ball")
    if x.is_exact():
        m = x.mid()
        f = float(m)
        if math.isfinite(f) and arb(f) == m:
            return Interval._raw(f, f)
    lo = float(x.lower())
    hi = float(x.upper())
    return Interval._raw(next_down(lo), next_up(hi))


def upper_float(x: arb) -> float:
    """A float not below any member of x."""
    return next_up(float(x.upper()))


def lower_float(x: arb) -> float:
    return next_down(float(x.lower()))
