"""Acceptance criteria 1-9.

Each test records a ``criterion n: PASS/FAIL ...`` line; pytest prints them in
the terminal summary.  ``python tests/test_acceptance.py`` runs them as a script.
"""

import math
import sys
import time
from pathlib import Path

if __name__ == "__main__":
    sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

import pytest

from circlekam.arnold import ArnoldFamily, periodic_orbit_bounds
from circlekam.diophantine import (RotationInterval, diophantine_measure_lb, dirichlet_limit,
                                   select_gamma, tail_term)
from circlekam.driver import RunConfig, run_branch_and_bound
from circlekam.interval import Interval
from circlekam.kam import certify_interval, default_seed, prepare_candidate, search_parameters

from tests.conftest import GOLDEN, golden_candidate
from tests.oracles import (dft_cases, dft_suite, diophantine_suite, fuzz_fourier, fuzz_intervals,
                           russmann_suite)

RESULTS: dict[int, str] = {}


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def _golden_search(eps: float, n: int, log2_width: int, target: float, m: int = 9):
    rad = 2.0 ** -(log2_width + 1)
    fam, h, a = golden_candidate(eps, m, n, rad)
    pc = prepare_candidate(h, a, fam)
    B = RotationInterval(GOLDEN - rad, GOLDEN + rad)
    dio = select_gamma(B, 1.2, target)
    return search_parameters(pc, dio, default_seed(dio.gamma, dio.tau), B)


@pytest.mark.slow
def test_criterion_1_golden_reference_run():
    t0 = time.perf_counter()
    rad = 2.0 ** -14
    fam, h, a = golden_candidate(0.25, 9, 2048, rad)
    pc = prepare_candidate(h, a, fam)
    B = RotationInterval(GOLDEN - rad, GOLDEN + rad)
    dio = select_gamma(B, 1.2, 0.99)
    rep = certify_interval(pc, dio, default_seed(dio.gamma, dio.tau), B)
    secs = time.perf_counter() - t0
    if not rep.certified:
        record(1, False, f"verdict {rep.verdict}")
    kappa, mu = rep.single["kappa"].hi, rep.lipschitz["mu"].hi
    check, rel = rep.check_lipschitz.hi, rep.relative_measure_lb.lo
    ok = kappa <= 1e-9 and mu <= 1e-9 and check <= 0.8 and rel >= 0.98 and secs <= 1800
    record(1, ok, f"Certified kappa={kappa:.3g} mu={mu:.3g} check={check:.3g} "
                  f"relative={rel:.6f} (>= 0.98) {secs:.0f}s")


@pytest.mark.slow
def test_criterion_2_weak_coupling_row():
    t0 = time.perf_counter()
    rep = _golden_search(1 / 128, 64, 12, 0.9999)
    secs = time.perf_counter() - t0
    rel = rep.relative_measure_lb.lo
    record(2, rep.certified and rel >= 0.9995 and secs <= 300,
           f"{rep.verdict} relative={rel:.6f} (>= 0.9995) {secs:.0f}s")


@pytest.mark.slow
def test_criterion_3_strong_coupling_row():
    t0 = time.perf_counter()
    rep = _golden_search(40 / 128, 256, 15, 0.9999)
    secs = time.perf_counter() - t0
    rel = rep.relative_measure_lb.lo
    record(3, rep.certified and rel >= 0.984 and secs <= 900,
           f"{rep.verdict} relative={rel:.6f} (>= 0.984) {secs:.0f}s")


@pytest.mark.slow
def test_criterion_4_branch_and_bound_sandwich():
    cfg = RunConfig(epsilon=0.25, lo=391 / 1024, hi=392 / 1024, order=9, fourier=256,
                    target_measure=0.99, workers=1, complement_qmax=5)
    res = run_branch_and_bound(cfg)  # raises SoundnessError if the sandwich fails
    visited = 2 * len(res.leaves) - 1
    rel = res.relative_measure_lb.lo
    upper = (res.alpha_range_ub - res.complement_lb).hi
    sandwich = res.total_measure_lb.hi <= upper
    ok = visited <= 100 and rel >= 0.97 and sandwich and not res.uncovered and res.seconds <= 7200
    record(4, ok, f"{len(res.leaves)} leaves / {visited} nodes relative={rel:.6f} (>= 0.97) "
                  f"measure {res.total_measure_lb.hi:.6g} <= {upper:.6g} {res.seconds:.0f}s")


def test_criterion_5_diophantine_oracle():
    out = diophantine_suite(100)
    B = RotationInterval(0.0, 1.0)
    limit_bad = 0
    for gamma in (1e-3, 1e-2, 5e-2):
        for Q in (16, 256, 4096):
            lb = diophantine_measure_lb(B, gamma, 1.2, Q)
            cap = dirichlet_limit(gamma, 1.2) + tail_term(Interval(gamma), Interval(1.2), Q)
            limit_bad += not lb.lo <= cap.hi
    record(5, out["violations"] == 0 and limit_bad == 0,
           f"{out['checks']} random cases, {out['violations']} violations; "
           f"full-circle limit {limit_bad}/9 violations")


def test_criterion_6_dft_bounds():
    out = dft_suite(dft_cases(20), (16, 64, 256))
    ok = out["coeff_violations"] == 0 and out["func_violations"] == 0
    record(6, ok, f"{out['coeff_checks']} coefficient and {out['func_checks']} function checks, "
                  f"{out['coeff_violations'] + out['func_violations']} violations, "
                  f"worst ratio {out['worst_ratio']:.3g}")


def test_criterion_7_russmann():
    out = russmann_suite(50)
    ok = out["violations"] == 0 and out["worst_residual"] <= 1e-12
    record(7, ok, f"{out['checks']} solves, {out['violations']} violations, residual "
                  f"{out['worst_residual']:.2g}, worst bound ratio {out['worst_ratio']:.3g}")


def test_criterion_8_interval_fuzzing():
    a = fuzz_intervals(84000)
    b = fuzz_fourier(500, 1)
    total = a["evaluations"] + b["evaluations"]
    bad = a["violations"] + b["violations"]
    record(8, total >= 10 ** 5 and bad == 0,
           f"{total} member evaluations ({a['evaluations']} interval ops, "
           f"{b['evaluations']} transform coefficients), {bad} violations")


def test_criterion_9_full_circle_complement():
    fam = ArnoldFamily(0.25)
    vals = [periodic_orbit_bounds(fam, q).lo for q in range(1, 9)]
    monotone = all(b >= a for a, b in zip(vals, vals[1:]))
    v5 = vals[4]
    record(9, 0 < v5 < 0.086 and monotone,
           f"q_max=5 bound {v5:.7f} in (0, 0.086); monotone over q_max=1..8: {monotone}")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
