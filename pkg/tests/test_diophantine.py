import math

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from circlekam.diophantine import (RotationInterval, default_q, diophantine_measure_lb,
                                   dirichlet_limit, resonance_overlap, russmann_constant,
                                   select_gamma, tail_term)
from circlekam.interval import Interval

from .oracles import diophantine_suite, resonance_union_measure, russmann_suite

GOLDEN = (math.sqrt(5) - 1) / 2


def inside(iv, value) -> bool:
    return mpmath.mpf(iv.lo) <= value <= mpmath.mpf(iv.hi)


def test_russmann_constant_at_one():
    mpmath.mp.dps = 40
    assert inside(russmann_constant(Interval(1.0)), mpmath.sqrt((mpmath.pi ** 2 / 6 - 1) * 2) / (4 * mpmath.pi))


def test_overlap_interior_resonance():
    B = RotationInterval(0.2, 0.8)
    val = resonance_overlap(1, 2, B, 0.01, 1.2)
    mpmath.mp.dps = 40
    assert inside(val, 2 * mpmath.mpf(0.01) / mpmath.mpf(2) ** mpmath.mpf(2.2))


def test_overlap_outside_is_zero():
    B = RotationInterval(0.6, 0.65)
    assert resonance_overlap(1, 3, B, 0.001, 1.2).hi == 0.0


def test_overlap_unit_interval_half():
    val = resonance_overlap(1, 2, RotationInterval(0.0, 1.0), 0.01, 1.2)
    assert inside(val, 2 * mpmath.mpf(0.01) / mpmath.mpf(2) ** mpmath.mpf(2.2))


def test_overlap_requires_coprime():
    with pytest.raises(ValueError):
        resonance_overlap(2, 4, RotationInterval(0.0, 1.0), 0.01, 1.2)


def test_gamma_zero_gives_full_measure():
    assert diophantine_measure_lb(RotationInterval(0.3, 0.4), 0.0, 1.2, 1024).lo == 1.0


def test_preconditions():
    B = RotationInterval(0.3, 0.31)
    with pytest.raises(ValueError):
        diophantine_measure_lb(B, 0.6, 1.2, 1024)
    with pytest.raises(ValueError):
        diophantine_measure_lb(B, 0.01, 1.0, 1024)
    with pytest.raises(ValueError):
        diophantine_measure_lb(B, 0.01, 1.2, 64)


def test_reference_golden_interval():
    rad = 2.0 ** -14
    B = RotationInterval(GOLDEN - rad, GOLDEN + rad)
    dio = select_gamma(B, 1.2, 0.99)
    assert dio.gamma.lo == 2.0 ** -10
    assert dio.relative_measure_lb.lo >= 0.99


def test_select_gamma_tiny_target():
    # 2^-2 is the first candidate, but its certified bound is clamped at 0,
    # so a tiny positive target picks the largest gamma with a positive bound
    B = RotationInterval(0.3, 0.4)
    dio = select_gamma(B, 1.2, 1e-9)
    assert dio.gamma.lo <= 0.25
    assert dio.relative_measure_lb.lo > 0
    assert diophantine_measure_lb(B, dio.gamma * 2, 1.2, default_q(B)).lo < 1e-9


def test_select_gamma_independent_reevaluation():
    B = RotationInterval(0.3, 0.4)
    dio = select_gamma(B, 1.2, 0.95)
    assert diophantine_measure_lb(B, dio.gamma, dio.tau, dio.q_max).lo >= 0.95
    # the next larger gamma must fail at the base Q
    assert diophantine_measure_lb(B, dio.gamma * 2, dio.tau, default_q(B)).lo < 0.95


def test_unit_interval_below_dirichlet_limit():
    B = RotationInterval(0.0, 1.0)
    for gamma in (0.001, 0.01, 0.05):
        for Q in (16, 256, 4096):
            lb = diophantine_measure_lb(B, gamma, 1.2, Q)
            limit = dirichlet_limit(gamma, 1.2) + tail_term(Interval(gamma), Interval(1.2), Q)
            assert lb.lo <= limit.hi


def test_dirichlet_limit_matches_mpmath():
    mpmath.mp.dps = 40
    g, t = mpmath.mpf(0.01), mpmath.mpf(1.2)
    assert inside(dirichlet_limit(0.01, 1.2), 1 - 2 * g * mpmath.zeta(t) / mpmath.zeta(t + 1))


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-4, 0.2), st.floats(1.05, 3.0), st.integers(4, 40))
def test_bound_non_increasing_in_gamma(gamma, tau, Q):
    B = RotationInterval(0.0, 1.0)
    assert diophantine_measure_lb(B, gamma, tau, Q).lo >= diophantine_measure_lb(B, gamma * 2, tau, Q).lo


@given(st.floats(1e-4, 0.4), st.floats(1.05, 3.0), st.integers(2, 10 ** 6))
def test_tail_strictly_decreasing(gamma, tau, Q):
    g, t = Interval(gamma), Interval(tau)
    assert tail_term(g, t, Q + 1).hi < tail_term(g, t, Q).lo or tail_term(g, t, Q + 1).hi <= tail_term(g, t, Q).hi


def test_brute_force_oracle():
    report = diophantine_suite(30, seed=12)
    assert report["violations"] == 0


def test_union_measure_oracle_sanity():
    # only q = 1 and q = 2 resonances in [0.4, 0.6] for Q = 2
    B = RotationInterval(0.4, 0.6)
    val = resonance_union_measure(B, 0.01, 1.5, 2)
    mpmath.mp.dps = 40
    width = mpmath.mpf(B.hi) - mpmath.mpf(B.lo)
    assert abs(val - (1 - 2 * mpmath.mpf(0.01) / mpmath.mpf(2) ** 2.5 / width)) < 1e-30


def test_russmann_inequality_small():
    report = russmann_suite(6, seed=13)
    assert report["violations"] == 0
