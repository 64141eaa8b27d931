"""Fourier-Taylor models in (theta - theta0).

A model stores jets F^[0..m] (trigonometric polynomials) and optionally an
order-(m+1) remainder R whose coefficients enclose
(1/(m+1)!) d^{m+1}F/dtheta^{m+1} at every theta in B.  Models of a
conjugacy store h - id, so the identity never appears in the jets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from flint import acb, arb

from .fourier import TrigPoly, as_arb, fourier_norm_arb, freq, strip_boundary_samples
from .interval import Interval, IntervalError, from_arb


def theta_ball(rad: float) -> arb:
    """T = [-rad, rad], the range of theta - theta0."""
    return arb(0, rad) if rad else arb(0)


def _horner(items: Sequence[arb | acb], t: arb) -> arb | acb:
    acc = items[-1]
    for c in reversed(items[:-1]):
        acc = acc * t + c
    return acc


@dataclass
class ScalarJet:
    """alpha(theta) = sum_s c_s (theta - theta0)^s (+ remainder * T^{m+1})."""

    theta0: float
    rad: float
    coeffs: list[arb]
    remainder: arb | None = None

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, s: int) -> arb:
        return self.coeffs[s] if 0 <= s < len(self.coeffs) else arb(0)

    def enclose_arb(self, rad: float | None = None) -> arb:
        t = theta_ball(self.rad if rad is None else rad)
        items = list(self.coeffs)
        if self.remainder is not None:
            items.append(self.remainder)
        return _horner(items, t)

    def enclose(self) -> Interval:
        return from_arb(self.enclose_arb())

    def derivative(self) -> "ScalarJet":
        """d/dtheta; a remainder R at order m+1 becomes (m+1) R at order m."""
        m = self.order
        coeffs = [self.coeffs[s] * s for s in range(1, m + 1)]
        rem = self.remainder * (m + 1) if self.remainder is not None else None
        if not coeffs:
            coeffs, rem = [rem if rem is not None else arb(0)], None
        return ScalarJet(self.theta0, self.rad, coeffs, rem)


@dataclass
class FourierTaylorModel:
    theta0: float
    rad: float
    jets: list[TrigPoly]
    remainder: TrigPoly | None = None

    def __post_init__(self) -> None:
        if not self.jets:
            raise ValueError("a model needs at least one jet")
        n = self.jets[0].n
        if any(j.n != n for j in self.jets) or (self.remainder is not None and self.remainder.n != n):
            raise ValueError("all jets must share one size N")

    @property
    def order(self) -> int:
        return len(self.jets) - 1

    @property
    def n(self) -> int:
        return self.jets[0].n

    def jet(self, s: int) -> TrigPoly:
        if 0 <= s <= self.order:
            return self.jets[s]
        return TrigPoly.zeros(self.n)

    def _with(self, jets: list[TrigPoly], remainder: TrigPoly | None) -> "FourierTaylorModel":
        return FourierTaylorModel(self.theta0, self.rad, jets, remainder)

    def add_constant(self, c: arb | float) -> "FourierTaylorModel":
        jets = list(self.jets)
        jets[0] = jets[0].add_constant(as_arb(c) if not isinstance(c, (arb, acb)) else c)
        return self._with(jets, self.remainder)

    def midpoint(self) -> "FourierTaylorModel":
        return self._with([j.midpoint() for j in self.jets], None)

    def with_rad(self, rad: float) -> "FourierTaylorModel":
        return FourierTaylorModel(self.theta0, rad, self.jets, self.remainder)

    def evaluate(self, x: complex | acb, theta: float | arb) -> acb:
        """Pointwise value of the polynomial part plus the remainder term."""
        t = as_arb(theta) - as_arb(self.theta0)
        vals = [j.evaluate(x) for j in self.jets]
        if self.remainder is not None:
            vals.append(self.remainder.evaluate(x))
        return _horner(vals, t)

    def twisted(self, shift: arb) -> "FourierTaylorModel":
        """x -> F(x + shift, theta), shift a real ball."""
        rem = self.remainder.twist(shift) if self.remainder is not None else None
        return self._with([j.twist(shift) for j in self.jets], rem)


def enclose(model: FourierTaylorModel) -> TrigPoly:
    """F_B: coefficients sum_s F^[s]_k T^s + R_k T^{m+1}, T = [-rad, rad]."""
    t = theta_ball(model.rad)
    polys = list(model.jets)
    if model.remainder is not None:
        polys.append(model.remainder)
    n = model.n
    if model.rad == 0:
        return TrigPoly(n, list(polys[0].coeffs), polys[0].real, polys[0].normalized)
    data = []
    for i in range(n):
        data.append(_horner([p.coeffs[i] for p in polys], t))
    real = all(p.real for p in polys)
    normalized = all(p.normalized for p in polys)
    return TrigPoly(n, data, real, normalized)


def _derivative_slack(poly: TrigPoly, rho: arb) -> arb:
    return fourier_norm_arb(poly.derivative(), rho) / (2 * poly.n)


def _boundary_poly(model: FourierTaylorModel | TrigPoly) -> TrigPoly:
    fb = enclose(model) if isinstance(model, FourierTaylorModel) else model
    if not fb.real:
        # one boundary line only bounds the strip for real-symmetric functions
        raise IntervalError("modulus bounds need a real-analytic polynomial")
    return fb


def max_modulus_arb(model: FourierTaylorModel | TrigPoly, rho: float | arb) -> arb:
    fb = _boundary_poly(model)
    rho_b = as_arb(rho)
    grid = strip_boundary_samples(fb, rho_b)
    return grid.max_abs_upper() + _derivative_slack(fb, rho_b)


def min_modulus_arb(model: FourierTaylorModel | TrigPoly, rho: float | arb) -> arb:
    fb = _boundary_poly(model)
    rho_b = as_arb(rho)
    grid = strip_boundary_samples(fb, rho_b)
    return grid.min_abs_lower() - _derivative_slack(fb, rho_b)


def max_modulus_bound(model: FourierTaylorModel | TrigPoly, rho: float | arb) -> Interval:
    """Upper bound of |F| on Im x = rho over theta in B (one boundary component)."""
    v = from_arb(max_modulus_arb(model, rho))
    return Interval(v.hi)


def min_modulus_bound(model: FourierTaylorModel | TrigPoly, rho: float | arb) -> Interval:
    """Lower bound of |F| on Im x = rho over theta in B; may be <= 0."""
    v = from_arb(min_modulus_arb(model, rho))
    return Interval(v.lo)


def jet_derivative_x(model: FourierTaylorModel, order: int = 1) -> FourierTaylorModel:
    rem = model.remainder.derivative(order) if model.remainder is not None else None
    return model._with([j.derivative(order) for j in model.jets], rem)


def jet_derivative_theta(model: FourierTaylorModel) -> FourierTaylorModel:
    """(s+1) F^[s+1]; a remainder R of order m+1 becomes (m+1) R at order m."""
    m = model.order
    if m < 1 and model.remainder is None:
        raise ValueError("theta derivative needs order >= 1")
    jets = [model.jets[s + 1].scale(arb(s + 1)) for s in range(m)]
    rem = None
    if model.remainder is not None:
        rem = model.remainder.scale(arb(m + 1))
    if not jets:
        jets = [rem]
        rem = None
    return model._with(jets, rem)


def _shift_terms(model: FourierTaylorModel, s: int, shift: acb | arb, j_min: int) -> list[acb]:
    """sum_{j >= j_min, l = s - j in jets} (2 pi i k)^j / j! h^[l]_k times the shift factor."""
    n = model.n
    two_pi = 2 * arb.pi()
    out = [acb(0)] * n
    lo = max(j_min, s - model.order)
    for j in range(lo, s + 1):
        src = model.jets[s - j]
        fact = arb(math.factorial(j))
        for i, c in enumerate(src.coeffs):
            if c.is_zero():
                continue
            k = freq(i, n)
            if j and k == 0:
                continue
            w = acb(0, two_pi * k) ** j / fact if j else acb(1)
            out[i] += c * w
    return out


def _twist_factors(n: int, shift: arb) -> list[acb]:
    return [acb.exp_pi_i(acb(2 * freq(i, n) * shift)) if freq(i, n) else acb(1) for i in range(n)]


def shifted_composition_jets(model: FourierTaylorModel) -> FourierTaylorModel:
    """Jets of H(x, theta) - x with H(x, theta) = h(x + theta, theta), model holding h - id.

    H^[s]_k = e^{2 pi i k theta0} sum_j (2 pi i k)^j / j! h^[s-j]_k, plus theta0
    at s = 0 and 1 at s = 1 (the x + theta part).  The remainder encloses
    sum_{j=1}^{m+1} (1/j!) d^j h^[m+1-j](x + B) / dx^j.
    """
    m = model.order
    n = model.n
    th0 = as_arb(model.theta0)
    tw0 = _twist_factors(n, th0)
    jets = []
    for s in range(m + 1):
        raw = _shift_terms(model, s, th0, 0)
        data = [c * w for c, w in zip(raw, tw0)]
        poly = TrigPoly(n, data, real=True)
        if s == 0:
            poly = poly.add_constant(th0)
        elif s == 1:
            poly = poly.add_constant(arb(1))
        jets.append(poly)
    twb = _twist_factors(n, th0 + theta_ball(model.rad))
    raw = _shift_terms(model, m + 1, th0, 1)
    rem = TrigPoly(n, [c * w for c, w in zip(raw, twb)], real=True)
    return model._with(jets, rem)


def fattened_jets(model: FourierTaylorModel) -> list[TrigPoly]:
    """h_B^[l] = sum_{s >= l} C(s, l) h^[s] T^{s-l}: Taylor coefficients re-centred anywhere in B."""
    t = theta_ball(model.rad)
    m = model.order
    n = model.n
    out = []
    for l in range(m + 1):
        data = []
        for i in range(n):
            items = [model.jets[s].coeffs[i] * math.comb(s, l) for s in range(l, m + 1)]
            data.append(_horner(items, t))
        out.append(TrigPoly(n, data, real=True))
    return out


def fattened_scalars(alpha: ScalarJet) -> list[arb]:
    t = theta_ball(alpha.rad)
    m = alpha.order
    return [_horner([alpha.coeffs[s] * math.comb(s, l) for s in range(l, m + 1)], t)
            for l in range(m + 1)]


# ---------------------------------------------------------------- cohomological equation
class SmallDivisorError(ArithmeticError):
    """|e^{2 pi i k theta} - 1| fell below the configured floor."""


def small_divisor_floor(k: int, tau: float = 1.2, scale: float = 1e-14) -> float:
    return scale * abs(k) ** -tau


def _as_complex_coeffs(poly: TrigPoly | np.ndarray) -> np.ndarray:
    if isinstance(poly, np.ndarray):
        return poly.astype(complex)
    return np.array([complex(c.real.mid()) + 1j * float(c.imag.mid()) for c in poly.coeffs])


def solve_cohomological(eta: TrigPoly | np.ndarray, theta: float,
                        normalization: TrigPoly | np.ndarray | None = None,
                        tau: float = 1.2, floor_scale: float = 1e-14) -> tuple[TrigPoly, float]:
    """Float solver of phi(x + theta) - phi(x) = eta(x).

    Returns the zero-average solution R eta and the average phi0 that makes
    <w (R eta + phi0)> = 0 for the weight w = normalization (phi0 = 0 when
    no weight is given).  Not rigorous; only used to build candidates.
    """
    c = _as_complex_coeffs(eta)
    n = len(c)
    k = np.fft.fftfreq(n, 1.0 / n)
    div = np.exp(2j * np.pi * k * theta) - 1
    out = np.zeros(n, complex)
    for i in range(1, n):
        if c[i] == 0:
            continue
        if abs(div[i]) < small_divisor_floor(int(k[i]), tau, floor_scale):
            raise SmallDivisorError(f"small divisor at k={int(k[i])}: {abs(div[i]):.3e}")
        out[i] = c[i] / div[i]
    phi0 = 0.0
    if normalization is not None:
        w = _as_complex_coeffs(normalization)
        # <w phi> = sum_k w_{-k} phi_k
        avg = np.sum(w[(-np.arange(n)) % n] * out)
        w0 = w[0]
        if abs(w0) == 0:
            raise ZeroDivisionError("weight has zero average")
        phi0 = float((-avg / w0).real)
    real = isinstance(eta, TrigPoly) and eta.real
    poly = TrigPoly(n, [acb(complex(v)) for v in out], real=real, normalized=True)
    return poly, phi0


# ---------------------------------------------------------------- candidate cache
CACHE_DIGITS = 80


def _dec(x: arb | float, digits: int) -> str:
    if isinstance(x, float):
        return repr(x)
    return x.mid().str(digits, radius=False)


def write_candidate(path: str | Path, h: FourierTaylorModel, alpha: ScalarJet, epsilon: float,
                    digits: int = CACHE_DIGITS) -> None:
    lines = [f"THETA0 {h.theta0!r} RAD {h.rad!r} M {h.order} N {h.n} EPS {epsilon!r}"]
    for s, jet in enumerate(h.jets):
        lines.append(jet.midpoint().to_text(digits).rstrip("\n"))
        lines.append(f"ALPHA {s} {_dec(alpha.coeff(s), digits)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_candidate(path: str | Path) -> tuple[FourierTaylorModel, ScalarJet, float]:
    """Inverse of write_candidate; coefficients come back as exact midpoints."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    head = lines[0].split()
    if head[0::2] != ["THETA0", "RAD", "M", "N", "EPS"]:
        raise ValueError(f"bad candidate header: {lines[0]!r}")
    theta0, rad = float(head[1]), float(head[3])
    m, n, eps = int(head[5]), int(head[7]), float(head[9])
    jets: list[TrigPoly] = []
    alphas: list[arb] = []
    pos = 1
    for s in range(m + 1):
        block = lines[pos:pos + n + 1]
        jets.append(TrigPoly.from_text(block).midpoint())
        jets[-1].normalized = True
        tag, idx, val = lines[pos + n + 1].split()
        if tag != "ALPHA" or int(idx) != s:
            raise ValueError(f"expected ALPHA {s}, got {lines[pos + n + 1]!r}")
        alphas.append(arb(val).mid())
        pos += n + 2
    return (FourierTaylorModel(theta0, rad, jets), ScalarJet(theta0, rad, alphas), eps)
