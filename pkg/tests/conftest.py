import functools
import math
import sys

import pytest

GOLDEN = (math.sqrt(5) - 1) / 2


@functools.lru_cache(maxsize=None)
def golden_candidate(epsilon: float, m: int, n: int, rad: float):
    """(family, h, alpha) for theta0 = golden mean, shared across test modules."""
    from circlekam.arnold import ArnoldFamily, lindstedt_candidate

    fam = ArnoldFamily(epsilon)
    h, a = lindstedt_candidate(fam, GOLDEN, m, n)
    h = h.with_rad(rad)
    a.rad = rad
    return fam, h, a


@pytest.fixture(scope="session")
def reference_run():
    """The epsilon = 0.25 reference configuration: rad 2^-14, m = 9, N = 2048, seed parameters."""
    from circlekam.diophantine import RotationInterval, select_gamma
    from circlekam.kam import certify_interval, default_seed, prepare_candidate

    rad = 2.0 ** -14
    fam, h, a = golden_candidate(0.25, 9, 2048, rad)
    pc = prepare_candidate(h, a, fam)
    B = RotationInterval(GOLDEN - rad, GOLDEN + rad)
    dio = select_gamma(B, 1.2, 0.99)
    return pc, dio, B, certify_interval(pc, dio, default_seed(dio.gamma, dio.tau), B)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
