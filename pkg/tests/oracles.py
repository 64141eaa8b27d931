"""Independent reference computations shared by the test modules."""

from __future__ import annotations

import math
import random
from fractions import Fraction

import mpmath
import numpy as np
from flint import acb, arb, fmpq

from circlekam import interval as iv
from circlekam.diophantine import RotationInterval, diophantine_measure_lb, russmann_constant
from circlekam.fourier import (GridSamples, TrigPoly, aliasing_coefficient_bound_arb, dft,
                               dft_function_error_bound_arb, idft, precision)
from circlekam.taylor import solve_cohomological

SAMPLES = 2 ** 14


# ---------------------------------------------------------------- Poisson kernel
def poisson_samples(r: Fraction, n: int) -> GridSamples:
    """P_r(j/n) = (1 - r^2) / (1 - 2 r cos(2 pi j/n) + r^2) as balls."""
    ra = arb(fmpq(r.numerator, r.denominator))
    return GridSamples.from_function(lambda x: (1 - ra ** 2) / (1 - 2 * ra * (2 * x).cos_pi() + ra ** 2), n)


def poisson_sup(r: float, rho: float) -> float:
    """sup of |P_r| on |Im x| <= rho, attained at x = i rho where every mode is positive."""
    mpmath.mp.dps = 40
    a = mpmath.mpf(r) * mpmath.exp(2 * mpmath.pi * rho)
    b = mpmath.mpf(r) * mpmath.exp(-2 * mpmath.pi * rho)
    return float(1 + a / (1 - a) + b / (1 - b))


def poisson_max_rho(r: float) -> float:
    return -math.log(r) / (2 * math.pi)


def _trig_on_lines(coeffs: np.ndarray, rho: float, m: int = SAMPLES) -> np.ndarray:
    """Values of sum c_k e^{2 pi i k x} at x = j/m + i y, y = +-rho, by a padded FFT."""
    n = len(coeffs)
    k = np.fft.fftfreq(n, 1.0 / n)
    out = []
    for y in (rho, -rho):
        pad = np.zeros(m, complex)
        tw = coeffs * np.exp(-2 * np.pi * k * y)
        pad[: n // 2] = tw[: n // 2]
        pad[m - n // 2:] = tw[n // 2:]
        out.append(np.fft.ifft(pad) * m)
    return np.concatenate(out)


def poisson_on_lines(r: float, rho: float, m: int = SAMPLES) -> np.ndarray:
    x = np.arange(m) / m
    out = []
    for y in (rho, -rho):
        z = x + 1j * y
        out.append((1 - r * r) / (1 - 2 * r * np.cos(2 * np.pi * z) + r * r))
    return np.concatenate(out)


def dft_suite(cases: list[tuple[float, float, float]], sizes=(16, 64, 256)) -> dict:
    """Check both DFT error inequalities for the Poisson kernel.

    cases are (r, rho, rho~) with r rational-friendly floats.  Returns counts.
    """
    coeff_checks = coeff_bad = func_checks = func_bad = 0
    worst = 0.0
    with precision(256):
        for r, rho, rho_t in cases:
            rq = Fraction(r).limit_denominator(1000)
            rf = float(rq)
            g_norm = poisson_sup(rf, rho_t)
            for n in sizes:
                poly = dft(poisson_samples(rq, n))
                ra = arb(fmpq(rq.numerator, rq.denominator))
                bound_norm = arb(g_norm) * (1 + arb(2) ** -40)
                for k in range(-n // 2, n // 2):
                    diff = abs(poly.acoeff(k) - ra ** abs(k)).lower()
                    s = aliasing_coefficient_bound_arb(k, n, arb(rho_t)) * bound_norm
                    coeff_checks += 1
                    if diff > s.upper():
                        coeff_bad += 1
                mids = np.array([complex(float(c.real.mid()), float(c.imag.mid())) for c in poly.coeffs])
                err = np.abs(_trig_on_lines(mids, rho) - poisson_on_lines(rf, rho)).max()
                cn = float((dft_function_error_bound_arb(arb(rho), arb(rho_t), n) * bound_norm).upper())
                func_checks += 1
                worst = max(worst, err / cn)
                if err > cn:
                    func_bad += 1
    return dict(coeff_checks=coeff_checks, coeff_violations=coeff_bad, func_checks=func_checks,
                func_violations=func_bad, worst_ratio=worst)


def dft_cases(count: int = 20, seed: int = 6) -> list[tuple[float, float, float]]:
    rnd = random.Random(seed)
    out = []
    for _ in range(count):
        r = rnd.uniform(0.8, 0.97)
        rmax = poisson_max_rho(r)
        rho_t = rnd.uniform(0.3, 0.9) * rmax
        rho = rnd.uniform(0.0, 0.8) * rho_t
        out.append((r, rho, rho_t))
    return out


# ---------------------------------------------------------------- Russmann
def diophantine_gamma(theta: float, tau: float, q_max: int = 4000) -> float:
    """min_{q <= q_max} |q theta - p| q^tau, the gamma that theta attains up to q_max."""
    mpmath.mp.dps = 40
    t = mpmath.mpf(theta)
    best = mpmath.inf
    for q in range(1, q_max + 1):
        d = abs(q * t - mpmath.nint(q * t)) * mpmath.mpf(q) ** tau
        best = min(best, d)
    return float(best) * (1 - 1e-12)


def random_zero_average(rnd: random.Random, n: int, degree: int, decay: float) -> np.ndarray:
    c = np.zeros(n, complex)
    for k in range(1, degree + 1):
        v = complex(rnd.gauss(0, 1), rnd.gauss(0, 1)) * math.exp(-2 * math.pi * k * decay)
        c[k] = v
        c[-k] = v.conjugate()
    return c


RUSSMANN_THETAS = ((math.sqrt(5) - 1) / 2, math.sqrt(2) - 1, math.e - 2, (math.sqrt(13) - 3) / 2,
                   math.pi - 3)


def russmann_suite(n_polys: int = 50, seed: int = 7, tau: float = 1.2, rho: float = 0.05,
                   delta: float = 0.02) -> dict:
    rnd = random.Random(seed)
    c_r = russmann_constant(iv.Interval(tau)).hi
    n = 64
    k = np.fft.fftfreq(n, 1.0 / n)
    worst_res = worst_ratio = 0.0
    bad = checks = 0
    for theta in RUSSMANN_THETAS:
        gamma = diophantine_gamma(theta, tau)
        for _ in range(n_polys):
            eta = random_zero_average(rnd, n, rnd.randint(3, 24), rnd.uniform(0.0, 0.05))
            phi, _ = solve_cohomological(eta, theta, tau=tau)
            pc = np.array([complex(float(c.real.mid()), float(c.imag.mid())) for c in phi.coeffs])
            res = pc * (np.exp(2j * np.pi * k * theta) - 1) - eta
            eta_sup0 = np.abs(_trig_on_lines(eta, 0.0, 1024)).max()
            res_sup = np.abs(_trig_on_lines(res, 0.0, 1024)).max()
            worst_res = max(worst_res, res_sup / eta_sup0)
            lhs = np.abs(_trig_on_lines(pc, rho - delta, 4096)).max()
            rhs = c_r * np.abs(_trig_on_lines(eta, rho, 4096)).max() / (gamma * delta ** tau)
            worst_ratio = max(worst_ratio, lhs / rhs)
            checks += 1
            if lhs > rhs or res_sup > 1e-12 * eta_sup0:
                bad += 1
    return dict(checks=checks, violations=bad, worst_residual=worst_res, worst_ratio=worst_ratio)


# ---------------------------------------------------------------- Diophantine brute force
def resonance_union_measure(B: RotationInterval, gamma: float, tau: float, Q: int) -> mpmath.mpf:
    """Leb(B minus the union of (p/q - gamma/q^(tau+1), p/q + gamma/q^(tau+1)), q <= Q) / |B|."""
    mpmath.mp.dps = 50
    lo, hi = mpmath.mpf(B.lo), mpmath.mpf(B.hi)
    g, t = mpmath.mpf(gamma), mpmath.mpf(tau)
    pieces = []
    for q in range(1, Q + 1):
        w = g / mpmath.mpf(q) ** (t + 1)
        for p in range(math.floor(B.lo * q) - 1, math.ceil(B.hi * q) + 2):
            if math.gcd(p, q) != 1:
                continue
            a, b = max(mpmath.mpf(p) / q - w, lo), min(mpmath.mpf(p) / q + w, hi)
            if a < b:
                pieces.append((a, b))
    pieces.sort()
    covered = mpmath.mpf(0)
    cur_a = cur_b = None
    for a, b in pieces:
        if cur_b is None or a > cur_b:
            if cur_b is not None:
                covered += cur_b - cur_a
            cur_a, cur_b = a, b
        else:
            cur_b = max(cur_b, b)
    if cur_b is not None:
        covered += cur_b - cur_a
    return (hi - lo - covered) / (hi - lo)


def diophantine_suite(count: int = 100, seed: int = 5) -> dict:
    rnd = random.Random(seed)
    bad = 0
    worst_gap = math.inf
    for _ in range(count):
        Q = rnd.randint(2, 50)
        width = rnd.uniform(2.0 / Q, 1.0)
        lo = rnd.uniform(0.0, 1.0 - width)
        B = RotationInterval(lo, lo + width)
        gamma = 10 ** rnd.uniform(-4, -1.2)
        tau = rnd.uniform(1.05, 3.0)
        lb = diophantine_measure_lb(B, gamma, tau, Q).hi
        exact = resonance_union_measure(B, gamma, tau, Q)
        worst_gap = min(worst_gap, float(exact - mpmath.mpf(lb)))
        if mpmath.mpf(lb) > exact:
            bad += 1
    return dict(checks=count, violations=bad, min_gap=worst_gap)


# ---------------------------------------------------------------- interval fuzzing
def _member(rnd: random.Random, x: iv.Interval) -> float:
    t = rnd.random()
    v = x.lo + t * (x.hi - x.lo)
    return min(max(v, x.lo), x.hi)


def _rand_interval(rnd: random.Random, lo: float, hi: float) -> iv.Interval:
    a, b = rnd.uniform(lo, hi), rnd.uniform(lo, hi)
    if rnd.random() < 0.2:
        b = a
    return iv.Interval(min(a, b), max(a, b))


def _in(x: iv.Interval, v) -> bool:
    return mpmath.mpf(x.lo) <= v <= mpmath.mpf(x.hi)


def fuzz_intervals(evaluations: int, seed: int = 8) -> dict:
    """Random member-point evaluations of every interval operation against mpmath / exact rationals."""
    mpmath.mp.dps = 60
    rnd = random.Random(seed)
    f = mpmath.mpf
    unary = [
        ("exp", iv.exp, mpmath.exp, (-40, 40)), ("log", iv.log, mpmath.log, (1e-8, 1e4)),
        ("sqrt", iv.sqrt, mpmath.sqrt, (0.0, 1e4)), ("sin", iv.sin, mpmath.sin, (-50, 50)),
        ("cos", iv.cos, mpmath.cos, (-50, 50)), ("sinh", iv.sinh, mpmath.sinh, (-30, 30)),
        ("cosh", iv.cosh, mpmath.cosh, (-30, 30)), ("sqr", lambda x: x.sqr(), lambda v: v * v, (-1e3, 1e3)),
        ("abs", abs, abs, (-10, 10)),
    ]
    binary = [
        ("add", lambda a, b: a + b, lambda x, y: x + y), ("sub", lambda a, b: a - b, lambda x, y: x - y),
        ("mul", lambda a, b: a * b, lambda x, y: x * y), ("div", lambda a, b: a / b, lambda x, y: x / y),
    ]
    count = bad = 0
    failures: list[str] = []
    while count < evaluations:
        pick = rnd.random()
        if pick < 0.45:
            name, op, exact = rnd.choice(binary)
            scale = 10 ** rnd.uniform(-12, 12)
            a = _rand_interval(rnd, -scale, scale)
            b = _rand_interval(rnd, -scale, scale)
            if name == "div" and b.contains_zero():
                continue
            res = op(a, b)
            for _ in range(4):
                x, y = Fraction(_member(rnd, a)), Fraction(_member(rnd, b))
                count += 1
                if not res.contains(exact(x, y)):
                    bad += 1
                    failures.append(f"{name} {a} {b}")
        elif pick < 0.85:
            name, op, exact, (lo, hi) = rnd.choice(unary)
            a = _rand_interval(rnd, lo, hi)
            res = op(a)
            for _ in range(4):
                x = f(_member(rnd, a))
                count += 1
                if not _in(res, exact(x)):
                    bad += 1
                    failures.append(f"{name} {a}")
        elif pick < 0.93:
            a = _rand_interval(rnd, 0.1, 5.0)
            y = _rand_interval(rnd, -3.0, 3.0)
            res = iv.power(a, y)
            for _ in range(4):
                x, e = f(_member(rnd, a)), f(_member(rnd, y))
                count += 1
                if not _in(res, x ** e):
                    bad += 1
                    failures.append(f"power {a} {y}")
        else:
            parts = [_rand_interval(rnd, -5, 5) for _ in range(4)]
            A, B = iv.ComplexInterval(parts[0], parts[1]), iv.ComplexInterval(parts[2], parts[3])
            ops = [(A * B, lambda z, w: z * w), (A + B, lambda z, w: z + w), (A - B, lambda z, w: z - w)]
            if not B.abs2().contains_zero():
                ops.append((A / B, lambda z, w: z / w))
            for res, ex in ops:
                z = mpmath.mpc(_member(rnd, parts[0]), _member(rnd, parts[1]))
                w = mpmath.mpc(_member(rnd, parts[2]), _member(rnd, parts[3]))
                v = ex(z, w)
                count += 1
                if not (_in(res.re, v.real) and _in(res.im, v.imag)):
                    bad += 1
                    failures.append("complex")
    return dict(evaluations=count, violations=bad, failures=failures[:5])


def _direct_dft(values: list[complex], inverse: bool) -> list[acb]:
    n = len(values)
    sign = 1 if inverse else -1
    out = []
    for k in range(n):
        acc = acb(0)
        for j, v in enumerate(values):
            acc += acb(v.real, v.imag) * acb(arb(fmpq(sign * 2 * ((j * k) % n), n))).exp_pi_i()
        out.append(acc if inverse else acc / n)
    return out


def fuzz_fourier(transforms: int, draws: int, n: int = 32, seed: int = 9) -> dict:
    """dft / idft of interval data evaluated at member points with a direct high-precision sum."""
    rnd = random.Random(seed)
    count = bad = 0
    for t in range(transforms):
        inverse = t % 2 == 1
        centers = [complex(rnd.uniform(-2, 2), rnd.uniform(-2, 2)) for _ in range(n)]
        rad = 10 ** rnd.uniform(-14, -3)
        with precision(80):
            balls = [acb(arb(c.real, rad), arb(c.imag, rad)) for c in centers]
            if inverse:
                res = idft(TrigPoly(n, balls)).values
            else:
                res = dft(GridSamples(n, balls)).coeffs
        for _ in range(draws):
            pts = [complex(c.real + rad * rnd.uniform(-0.999, 0.999), c.imag + rad * rnd.uniform(-0.999, 0.999))
                   for c in centers]
            with precision(400):
                exact = _direct_dft(pts, inverse)
            for r_out, e in zip(res, exact):
                count += 1
                if not r_out.contains(e):
                    bad += 1
    return dict(evaluations=count, violations=bad)
