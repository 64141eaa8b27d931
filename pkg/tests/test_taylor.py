import math
import random

import numpy as np
import pytest
from flint import acb, arb
from hypothesis import given, settings, strategies as st

from circlekam.fourier import TrigPoly, precision
from circlekam.interval import IntervalError
from circlekam.taylor import (FourierTaylorModel, ScalarJet, SmallDivisorError, enclose,
                              jet_derivative_theta, jet_derivative_x, max_modulus_bound,
                              min_modulus_bound, read_candidate, shifted_composition_jets,
                              solve_cohomological, write_candidate)

from .oracles import _trig_on_lines

GOLDEN = (math.sqrt(5) - 1) / 2


def _sine(n: int, amp: float = 1.0) -> TrigPoly:
    return TrigPoly.from_dict(n, {1: acb(0, -amp / 2), -1: acb(0, amp / 2)}, real=True)


def _random_real(rnd: random.Random, n: int, degree: int, scale: float, zero_avg: bool = True) -> TrigPoly:
    coeffs = {}
    for k in range(1, degree + 1):
        v = complex(rnd.gauss(0, 1), rnd.gauss(0, 1)) * scale * math.exp(-k / 2)
        coeffs[k] = acb(v.real, v.imag)
        coeffs[-k] = acb(v.real, -v.imag)
    if not zero_avg:
        coeffs[0] = acb(rnd.gauss(0, 1) * scale)
    return TrigPoly.from_dict(n, coeffs, real=True, normalized=zero_avg)


def _random_model(rnd: random.Random, n: int = 16, m: int = 2, rad: float = 0.01,
                  zero_avg: bool = True) -> FourierTaylorModel:
    jets = [_random_real(rnd, n, rnd.randint(1, n // 2 - 1), 0.1 / (s + 1), zero_avg) for s in range(m + 1)]
    return FourierTaylorModel(rnd.uniform(0.1, 0.9), rad, jets)


def _mids(poly: TrigPoly) -> np.ndarray:
    return np.array([complex(float(c.real.mid()), float(c.imag.mid())) for c in poly.coeffs])


def test_enclose_order_zero_is_identity():
    rnd = random.Random(1)
    p = _random_real(rnd, 16, 5, 1.0)
    out = enclose(FourierTaylorModel(0.3, 0.01, [p]))
    assert all(a.contains(b) for a, b in zip(out.coeffs, p.coeffs))


def test_enclose_rad_zero_is_first_jet():
    rnd = random.Random(2)
    model = _random_model(rnd, rad=0.0)
    out = enclose(model)
    assert all(a.contains(b) and b.contains(a) for a, b in zip(out.coeffs, model.jets[0].coeffs))


def test_enclose_linear_minkowski_sum():
    rnd = random.Random(3)
    r = 0.05
    model = _random_model(rnd, m=1, rad=r)
    out = enclose(model)
    for i, c in enumerate(out.coeffs):
        for t in (-r, -r / 3, 0.0, r / 2, r):
            v = model.jets[0].coeffs[i] + model.jets[1].coeffs[i] * t
            assert c.contains(v)


def test_enclose_widths_shrink_with_rad():
    rnd = random.Random(4)
    model = _random_model(rnd, rad=1e-2)
    w1 = max(float(c.rad()) for c in enclose(model).coeffs)
    w2 = max(float(c.rad()) for c in enclose(model.with_rad(1e-4)).coeffs)
    assert w2 < w1 / 50


def test_modulus_of_constant():
    const = TrigPoly.constant(16, 2.5)
    assert max_modulus_bound(const, 0.1).contains(2.5)
    assert min_modulus_bound(const, 0.1).contains(2.5)


def test_modulus_of_sine():
    n = 32
    upper = max_modulus_bound(_sine(n), 0.0).hi
    assert 1.0 <= upper <= 1.0 + math.pi / n + 1e-12


def test_min_modulus_of_shifted_sine():
    n = 32
    p = _sine(n).add_constant(arb(2))
    low = min_modulus_bound(p, 0.0).lo
    assert 1.0 - math.pi / n - 1e-12 <= low <= 1.0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(0.0, 0.05))
def test_modulus_bounds_against_sampling(seed, rho):
    rnd = random.Random(seed)
    model = _random_model(rnd, zero_avg=False).add_constant(2.0)
    upper = max_modulus_bound(model, rho).hi
    lower = min_modulus_bound(model, rho).lo
    t0 = model.theta0
    for theta in np.linspace(t0 - model.rad, t0 + model.rad, 7):
        dt = theta - t0
        coeffs = sum(_mids(j) * dt ** s for s, j in enumerate(model.jets))
        vals = np.abs(_trig_on_lines(coeffs, rho, 4096))
        assert vals.max() <= upper * (1 + 1e-12)
        assert vals.min() >= lower - 1e-12


def test_derivative_x_of_sine():
    model = FourierTaylorModel(0.0, 0.0, [_sine(16)])
    d = jet_derivative_x(model).jets[0]
    with precision(128):
        assert d.acoeff(1).contains(arb.pi()) and d.acoeff(-1).contains(arb.pi())


def test_derivative_x_of_constant_is_zero():
    d = jet_derivative_x(FourierTaylorModel(0.0, 0.0, [TrigPoly.constant(8, 3.0)])).jets[0]
    assert all(c.is_zero() for c in d.coeffs)


def test_derivative_theta_of_identity_scalar():
    alpha = ScalarJet(0.4, 0.01, [arb(0.4), arb(1)])
    assert alpha.derivative().enclose().contains(1.0)


def test_derivative_theta_needs_order():
    with pytest.raises(ValueError):
        jet_derivative_theta(FourierTaylorModel(0.0, 0.0, [TrigPoly.zeros(8)]))


def test_shifted_identity():
    n = 16
    model = FourierTaylorModel(GOLDEN, 1e-3, [TrigPoly.zeros(n), TrigPoly.zeros(n)])
    out = shifted_composition_jets(model)
    assert out.jets[0].acoeff(0).contains(arb(GOLDEN))
    assert out.jets[1].acoeff(0).contains(arb(1))
    assert all(c.is_zero() for i, c in enumerate(out.jets[1].coeffs) if i)


def test_shifted_order_zero_is_twist():
    n = 16
    p = _sine(n, 0.3)
    out = shifted_composition_jets(FourierTaylorModel(0.2, 0.0, [p]))
    with precision(128):
        for x in (0.0, 0.13, 0.71):
            expect = p.evaluate(arb(x) + arb(0.2)) + arb(0.2)
            assert out.jets[0].evaluate(arb(x)).overlaps(expect)


def test_shifted_composition_pointwise():
    rnd = random.Random(5)
    with precision(200):
        model = _random_model(rnd, m=2, rad=0.02)
        out = shifted_composition_jets(model)
        for _ in range(100):
            x = rnd.random()
            theta = model.theta0 + rnd.uniform(-1, 1) * model.rad
            exact = model.evaluate(arb(x) + arb(theta), theta) + arb(theta)
            got = out.evaluate(arb(x), theta)
            assert got.contains(acb(exact.real.mid(), exact.imag.mid()))


def test_cohomological_zero():
    phi, avg = solve_cohomological(np.zeros(16, complex), GOLDEN)
    assert all(c.is_zero() for c in phi.coeffs) and avg == 0.0


def test_cohomological_two_term_closed_form():
    eta = np.zeros(8, complex)
    eta[1] = eta[-1] = 1.0
    phi, _ = solve_cohomological(eta, 0.25)
    c = _mids(phi)
    assert abs(c[1] - 1 / (np.exp(0.5j * np.pi) - 1)) < 1e-15
    assert abs(c[-1] - 1 / (np.exp(-0.5j * np.pi) - 1)) < 1e-15


def test_cohomological_residual_golden():
    rnd = random.Random(6)
    n = 64
    k = np.fft.fftfreq(n, 1.0 / n)
    eta = np.zeros(n, complex)
    for j in range(1, 20):
        v = complex(rnd.gauss(0, 1), rnd.gauss(0, 1)) * math.exp(-j / 4)
        eta[j], eta[-j] = v, v.conjugate()
    phi, _ = solve_cohomological(eta, GOLDEN)
    res = _mids(phi) * (np.exp(2j * np.pi * k * GOLDEN) - 1) - eta
    assert np.abs(np.fft.ifft(res) * n).max() <= 1e-12 * np.abs(np.fft.ifft(eta) * n).max()


def test_cohomological_small_divisor():
    eta = np.zeros(16, complex)
    eta[2] = eta[-2] = 1.0
    with pytest.raises(SmallDivisorError):
        solve_cohomological(eta, 0.5)


def test_candidate_file_round_trip(tmp_path):
    rnd = random.Random(7)
    model = _random_model(rnd, m=2, rad=0.0)
    alpha = ScalarJet(model.theta0, 0.0, [arb(0.25), arb(1.5), arb(-0.1)])
    path = tmp_path / "cand.txt"
    write_candidate(path, model, alpha, 0.25)
    h, a, eps = read_candidate(path)
    assert eps == 0.25 and h.order == 2 and h.n == model.n
    for j_new, j_old in zip(h.jets, model.jets):
        for a_c, b_c in zip(j_new.coeffs, j_old.coeffs):
            assert abs(complex(float(a_c.real.mid()), float(a_c.imag.mid()))
                       - complex(float(b_c.real.mid()), float(b_c.imag.mid()))) < 1e-15
    assert abs(float(a.coeff(1)) - 1.5) < 1e-15


def test_modulus_rejects_complex_polynomial():
    p = TrigPoly.from_dict(16, {1: acb(1, 0)})
    with pytest.raises(IntervalError):
        max_modulus_bound(p, 0.1)
