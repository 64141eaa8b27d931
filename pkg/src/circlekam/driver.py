"""Branch and bound over rotation intervals, aggregation and the phase-locking complement."""

from __future__ import annotations

import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from .arnold import ArnoldFamily, CandidateError, _certify_orbit, _root_near, _alpha_star, \
    lindstedt_candidate, periodic_orbit_bounds, tongue_width_lb
from .diophantine import RotationInterval, select_gamma
from .interval import Interval, IntervalError, as_interval
from .kam import default_seed, prepare_candidate, search_parameters, _jsonable
from .taylor import SmallDivisorError, read_candidate, write_candidate

log = logging.getLogger(__name__)

PENDING, CERTIFIED, FAILED, TOO_SMALL = "Pending", "Certified", "Failed", "TooSmall"


class SoundnessError(RuntimeError):
    """Certified lower bounds contradict a certified upper bound."""


@dataclass
class RunConfig:
    epsilon: float = 0.25
    lo: float = 0.0
    hi: float = 1.0
    order: int = 9
    fourier: int = 256
    tau: float = 1.2
    target_measure: float = 0.99
    max_depth: int = 30
    min_width: float = 2.0 ** -26
    tol: float | None = None
    workers: int = 1
    cache: str | None = None
    out: str | None = None
    complement_qmax: int = 0
    resume: bool = False

    def __post_init__(self) -> None:
        if not 0 <= self.epsilon < 1:
            raise ValueError("epsilon must lie in [0, 1)")
        if not self.tau >= 1:
            raise ValueError("tau must be >= 1")
        if not 0 < self.target_measure < 1:
            raise ValueError("target_measure must lie in (0, 1)")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not self.min_width > 0:
            raise ValueError("min_width must be positive")
        if not 0 <= self.max_depth <= 60:
            raise ValueError("max_depth must lie in [0, 60]")
        if not 0 <= self.lo < self.hi <= 1:
            raise ValueError("interval must satisfy 0 <= lo < hi <= 1")
        if self.fourier < 8 or self.fourier & (self.fourier - 1):
            raise ValueError("fourier must be a power of two >= 8")
        if self.order < 1:
            raise ValueError("order must be >= 1")

    @property
    def interval(self) -> RotationInterval:
        return RotationInterval(self.lo, self.hi)

    def node_key(self, B: RotationInterval) -> str:
        """Stable hash of everything that influences a node's report."""
        parts = [self.epsilon, self.order, self.fourier, self.tau, self.target_measure, self.tol,
                 B.lo, B.hi]
        return hashlib.sha256(repr([float.hex(float(p)) if p is not None else "-" for p in parts])
                              .encode()).hexdigest()[:20]


@dataclass
class SubdivisionNode:
    interval: RotationInterval
    depth: int
    status: str = PENDING
    measure_lb: Interval = Interval(0.0)
    reason: str = ""
    seconds: float = 0.0
    report: dict | None = field(default=None, repr=False)


@dataclass
class AggregateResult:
    interval: RotationInterval
    total_measure_lb: Interval
    leaves: list[SubdivisionNode]
    complement_lb: Interval = Interval(0.0)
    alpha_range_ub: Interval | None = None
    seconds: float = 0.0

    @property
    def uncovered(self) -> list[SubdivisionNode]:
        return [n for n in self.leaves if n.status != CERTIFIED]

    @property
    def uncovered_width(self) -> Interval:
        total = Interval(0.0)
        for n in self.uncovered:
            total = total + n.interval.width
        return total

    @property
    def relative_measure_lb(self) -> Interval:
        return (self.total_measure_lb / self.interval.width.upper()).lower()

    def counts(self) -> dict[str, int]:
        out = {CERTIFIED: 0, FAILED: 0, TOO_SMALL: 0}
        for n in self.leaves:
            out[n.status] = out.get(n.status, 0) + 1
        return out

    def summary(self, cfg: RunConfig | None = None) -> dict:
        doc = {
            "interval": {"lo": self.interval.lo, "hi": self.interval.hi},
            "verdict": "Certified" if not self.uncovered else "Partial",
            "total_measure_lb": self.total_measure_lb,
            "relative_measure_lb": self.relative_measure_lb,
            "complement_lb": self.complement_lb,
            "alpha_range_ub": self.alpha_range_ub,
            "leaves": len(self.leaves),
            "nodes_by_status": self.counts(),
            "uncovered_width": self.uncovered_width,
            "uncovered": [{"lo": n.interval.lo, "hi": n.interval.hi, "status": n.status,
                           "reason": n.reason} for n in self.uncovered],
            "wall_seconds": self.seconds,
            "nodes": [{"lo": n.interval.lo, "hi": n.interval.hi, "depth": n.depth, "status": n.status,
                       "measure_lb": n.measure_lb, "report": n.report} for n in self.leaves],
        }
        if cfg is not None:
            doc["config"] = asdict(cfg)
        return _jsonable(doc)


# ---------------------------------------------------------------- one node
def _bisect(B: RotationInterval) -> tuple[RotationInterval, RotationInterval] | None:
    m = B.lo / 2 + B.hi / 2
    if not B.lo < m < B.hi:
        return None
    return RotationInterval(B.lo, m), RotationInterval(m, B.hi)


def _center_radius(B: RotationInterval) -> tuple[float, float]:
    """theta0 and the smallest float rad with [theta0 - rad, theta0 + rad] covering B."""
    t0 = B.lo / 2 + B.hi / 2
    rad = max(B.hi - t0, t0 - B.lo)
    while Fraction(t0) - Fraction(rad) > Fraction(B.lo) or Fraction(t0) + Fraction(rad) < Fraction(B.hi):
        rad = math.nextafter(rad, math.inf)
    return t0, rad


def _candidate(cfg: RunConfig, theta0: float):
    fam = ArnoldFamily(cfg.epsilon)
    path = None
    if cfg.cache:
        key = hashlib.sha256(repr((float.hex(cfg.epsilon), float.hex(theta0), cfg.order,
                                   cfg.fourier, cfg.tol)).encode()).hexdigest()[:20]
        path = Path(cfg.cache) / f"cand_{key}.txt"
        if path.exists():
            h, a, _ = read_candidate(path)
            return fam, h, a
    h, a = lindstedt_candidate(fam, theta0, cfg.order, cfg.fourier, cfg.tol)
    if path is not None:
        write_candidate(path, h, a, cfg.epsilon)
    return fam, h, a


def certify_node(cfg: RunConfig, B: RotationInterval, depth: int = 0) -> SubdivisionNode:
    """Candidate, (gamma, tau), parameter search and verdict for one interval."""
    t0 = time.perf_counter()
    node = SubdivisionNode(B, depth)
    report_path = Path(cfg.cache) / f"node_{cfg.node_key(B)}.json" if cfg.cache else None
    if cfg.resume and report_path is not None and report_path.exists():
        doc = json.loads(report_path.read_text())
        node.status, node.reason = doc["status"], doc["reason"]
        node.measure_lb = Interval(float(doc["measure_lb"]["lo"]), float(doc["measure_lb"]["hi"]))
        node.report = doc.get("report")
        return node
    theta0, rad = _center_radius(B)
    rep = None
    try:
        fam, h, a = _candidate(cfg, theta0)
        h = h.with_rad(rad)
        a.rad = rad
        dio = select_gamma(B, cfg.tau, cfg.target_measure)
        pc = prepare_candidate(h, a, fam)
        rep = search_parameters(pc, dio, default_seed(dio.gamma, dio.tau), B)
        if rep.certified:
            node.status, node.measure_lb = CERTIFIED, rep.measure_lb
        else:
            node.status, node.reason = FAILED, rep.verdict
    except (CandidateError, SmallDivisorError, IntervalError, ValueError) as exc:
        node.status, node.reason = FAILED, f"{type(exc).__name__}: {exc}"
    node.seconds = time.perf_counter() - t0
    node.report = rep.to_dict() if rep is not None else None
    if report_path is not None:
        doc = {"status": node.status, "reason": node.reason, "measure_lb": node.measure_lb,
               "depth": depth, "seconds": node.seconds, "report": node.report}
        report_path.write_text(json.dumps(_jsonable(doc), indent=1))
    log.info("node [%r, %r] depth %d: %s %s (%.1fs)", B.lo, B.hi, depth, node.status,
             node.reason, node.seconds)
    return node


def _certify_task(args: tuple[RunConfig, RotationInterval, int]) -> SubdivisionNode:
    return certify_node(*args)


# ---------------------------------------------------------------- branch and bound
def run_branch_and_bound(cfg: RunConfig) -> AggregateResult:
    """Certify B, bisecting failed nodes level by level; deterministic for any worker count."""
    t0 = time.perf_counter()
    if cfg.cache:
        Path(cfg.cache).mkdir(parents=True, exist_ok=True)
    frontier = [(cfg.interval, 0)]
    leaves: list[SubdivisionNode] = []
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        while frontier:
            tasks = [(cfg, B, d) for B, d in frontier]
            results = list(pool.map(_certify_task, tasks)) if pool else [_certify_task(t) for t in tasks]
            frontier = []
            for node in results:
                if node.status == CERTIFIED:
                    leaves.append(node)
                    continue
                halves = _bisect(node.interval)
                if halves is None or node.interval.width.hi / 2 < cfg.min_width \
                        or node.depth >= cfg.max_depth:
                    node.status = TOO_SMALL
                    leaves.append(node)
                    continue
                frontier.extend((h, node.depth + 1) for h in halves)
    finally:
        if pool:
            pool.shutdown()
    leaves.sort(key=lambda n: n.interval.lo)
    _check_partition(cfg.interval, leaves)
    total = Interval(0.0)
    for n in leaves:
        total = total + n.measure_lb
    res = AggregateResult(cfg.interval, total.lower(), leaves, seconds=time.perf_counter() - t0)
    if cfg.complement_qmax:
        res = aggregate_with_complement(res, ArnoldFamily(cfg.epsilon), cfg.complement_qmax)
    if cfg.out:
        Path(cfg.out).write_text(json.dumps(res.summary(cfg), indent=2))
    return res


def _check_partition(B: RotationInterval, leaves: list[SubdivisionNode]) -> None:
    pos = B.lo
    for n in leaves:
        if n.interval.lo != pos:
            raise SoundnessError(f"leaves do not tile B at {pos!r}")
        pos = n.interval.hi
    if pos != B.hi:
        raise SoundnessError("leaves do not reach the end of B")


# ---------------------------------------------------------------- complement
def _neighbour_fractions(B: RotationInterval, q_cap: int) -> tuple[Fraction, Fraction]:
    """Largest p/q <= B.lo and smallest p/q >= B.hi with q <= q_cap."""
    lo, hi = Fraction(B.lo), Fraction(B.hi)
    below, above = Fraction(math.floor(lo)), Fraction(math.ceil(hi))
    for q in range(1, q_cap + 1):
        p = math.floor(lo * q)
        if Fraction(p, q) > below:
            below = Fraction(p, q)
        p = math.ceil(hi * q)
        if Fraction(p, q) < above:
            above = Fraction(p, q)
    return below, above


def _locked_alpha(fam: ArnoldFamily, r: Fraction) -> float | None:
    """A parameter with a certified periodic orbit of rotation number r."""
    import numpy as np

    p, q = r.numerator, r.denominator
    xs = (np.arange(1024) + 0.5) / 1024
    stars = _alpha_star(fam.epsilon, xs, p, q)
    alpha = float(0.5 * (stars.min() + stars.max()))
    k = int(np.argmin(stars))
    x0 = _root_near(fam.epsilon, alpha, xs, k, stars, p, q)
    if x0 is None or not _certify_orbit(as_interval(fam.epsilon), alpha, x0, p, q):
        return None
    return alpha


def alpha_range_upper(fam: ArnoldFamily, B: RotationInterval, q_cap: int = 12) -> Interval:
    """Upper bound of the measure of parameters whose rotation number lies in B.

    Rotation number is monotone in alpha, so parameters with certified
    orbits of rotation r1 <= B.lo and r2 >= B.hi bracket the set.
    """
    if B.lo <= 0 and B.hi >= 1:
        return Interval(1.0)
    if fam.epsilon == 0:
        return B.width
    for cap in range(q_cap, 0, -1):
        r1, r2 = _neighbour_fractions(B, cap)
        a1, a2 = _locked_alpha(fam, r1), _locked_alpha(fam, r2)
        if a1 is not None and a2 is not None:
            return (Interval(a2) - Interval(a1)).upper()
    return Interval(math.inf)


def aggregate_with_complement(result: AggregateResult, fam: ArnoldFamily, q_max: int) -> AggregateResult:
    """Attach the phase-locking lower bound and enforce measure_lb <= Leb(range) - complement.

    On B = (0, 1) the range is the whole parameter circle.  On a sub-interval
    only tongues p/q inside B count, and the range is bracketed by locked
    parameters of neighbouring rationals.
    """
    B = result.interval
    whole = B.lo <= 0 and B.hi >= 1
    if whole:
        comp = periodic_orbit_bounds(fam, q_max)
    else:
        comp = Interval(0.0)
        for q in range(1, q_max + 1):
            for p in range(math.ceil(B.lo * q), math.floor(B.hi * q) + 1):
                r = Fraction(p, q)
                if math.gcd(p, q) == 1 and Fraction(B.lo) < r < Fraction(B.hi):
                    comp = comp + tongue_width_lb(fam, p % q, q)
        comp = comp.lower()
    upper = alpha_range_upper(fam, B)
    if not result.total_measure_lb.lo <= (upper - comp).hi:
        raise SoundnessError(f"measure lower bound {result.total_measure_lb!r} exceeds "
                             f"{upper!r} - {comp!r}")
    result.complement_lb = comp
    result.alpha_range_ub = upper
    return result
