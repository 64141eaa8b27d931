"""Constants and checks of the a-posteriori KAM theorems for circle maps.

Everything that enters an inequality is an ``Interval``; a quantity that
must be small is used through its upper end, a denominator through its
lower end, which plain interval arithmetic does automatically.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, fields
from typing import Any, Protocol

from flint import acb, arb

from .diophantine import DiophantineParams, RotationInterval, lipschitz_russmann_constant, \
    russmann_constant
from .fourier import (TrigPoly, aliasing_coefficient_bound_arb, as_arb, dft_function_error_bound_arb,
                      fourier_norm_arb, idft, precision, DEFAULT_PREC)
from .interval import Interval, IntervalError, as_interval, from_arb, power, to_arb
from .taylor import (FourierTaylorModel, ScalarJet, _horner, enclose, jet_derivative_theta,
                     jet_derivative_x, max_modulus_arb, min_modulus_arb, shifted_composition_jets,
                     theta_ball)

SERIES_REL_TOL = 2.0 ** -60
SLACK_FLOOR = 2.0 ** -20
SERIES_MAX_TERMS = 64


# ---------------------------------------------------------------- data
@dataclass(frozen=True)
class FamilyBounds:
    c_x: Interval
    c_alpha: Interval
    c_xx: Interval
    c_xalpha: Interval
    c_alphaalpha: Interval
    c_xxx: Interval
    c_xxalpha: Interval
    c_xalphaalpha: Interval
    c_alphaalphaalpha: Interval
    rho_hat: Interval
    r: Interval


@dataclass(frozen=True)
class KamParameters:
    rho: Interval
    delta: Interval
    rho_inf: Interval
    rho_hat: Interval
    rho_tilde: Interval
    gamma: Interval
    tau: Interval
    sigma: float = 1.01

    @classmethod
    def from_ratios(cls, rho: float, gamma: Interval | float, tau: Interval | float,
                    rho_hat: float, delta_ratio: float = 0.25, inf_ratio: float = 1e-3,
                    tilde_ratio: float = 12.0, sigma: float = 1.01) -> "KamParameters":
        return cls(Interval(rho), Interval(rho * delta_ratio), Interval(rho * inf_ratio),
                   Interval(rho_hat), Interval(rho * tilde_ratio), as_interval(gamma),
                   as_interval(tau), sigma)

    def domain_error(self) -> str | None:
        rho, d, ri = self.rho, self.delta, self.rho_inf
        if not (d > 0 and d * 2 < rho):
            return "0 < delta < rho/2"
        if not (ri > 0 and ri < rho - d * 2):
            return "0 < rho_inf < rho - 2 delta"
        if not self.rho_tilde > rho:
            return "rho < rho_tilde"
        if not self.sigma > 1:
            return "sigma > 1"
        return None


@dataclass(frozen=True)
class HypothesisConstants:
    sigma1: Interval
    sigma2: Interval
    sigma3: Interval
    sigma_b: Interval
    beta0: Interval
    beta1: Interval
    beta2: Interval
    lip_lb_alpha: Interval
    dist_h_boundary: Interval
    dist_alpha_boundary: Interval
    # the measured quantities the slack was applied to
    norm_dxh: Interval = Interval(0.0)
    norm_inv_dxh: Interval = Interval(0.0)
    norm_dxxh: Interval = Interval(0.0)
    inv_avg_b: Interval = Interval(0.0)
    lip_h: Interval = Interval(0.0)
    lip_dxh: Interval = Interval(0.0)
    lip_alpha: Interval = Interval(0.0)


@dataclass(frozen=True)
class ErrorBounds:
    norm_e: Interval
    lip_e: Interval
    weighted: Interval
    details: dict = field(default_factory=dict, compare=False)


class HypothesisFailed(Exception):
    def __init__(self, name: str, detail: str = ""):
        super().__init__(f"{name}: {detail}" if detail else name)
        self.name = name


class FamilyEvaluator(Protocol):
    epsilon: float

    def bounds(self, rho_hat: Interval | float) -> FamilyBounds: ...

    def jet_compose(self, h: FourierTaylorModel, alpha: ScalarJet) -> FourierTaylorModel: ...

    def model_majorants(self, h: FourierTaylorModel, alpha: ScalarJet,
                        rho_t: arb) -> tuple[list[arb], arb]: ...


# ---------------------------------------------------------------- series
def sigma_series(kappa: Interval, a1: Interval, lam: Interval | float) -> Interval:
    """Sigma_{kappa,lambda} = sum_j kappa^(2^j - 1) a1^(-lambda j) with a rigorous tail.

    From index J on, consecutive terms have ratio kappa^(2^j) a1^(-lambda)
    <= q := kappa^(2^J) max(1, a1^(-lambda)), so the tail is at most
    term_J / (1 - q).
    """
    lam = as_interval(lam)
    if not kappa.lo >= 0 or not kappa.hi < 1:
        raise IntervalError(f"series needs 0 <= kappa < 1, got {kappa!r}")
    if kappa.hi == 0:
        return Interval(1.0)
    step = power(a1, -lam)
    grow = step.max(1.0)
    total = Interval(0.0)
    kpow = Interval(1.0)  # kappa^(2^j - 1)
    apow = Interval(1.0)  # a1^(-lambda j)
    k2j = kappa  # kappa^(2^j)
    for j in range(SERIES_MAX_TERMS):
        term = kpow * apow
        q = k2j * grow
        if q.hi < 0.5 and term.hi <= SERIES_REL_TOL * total.lo:
            tail = term.hi / (1 - q).lo
            return total + Interval(0.0, tail)
        total = total + term
        kpow = kpow * k2j
        apow = apow * step
        k2j = k2j.sqr()
    raise IntervalError("series tail did not close; kappa too close to 1")


# ---------------------------------------------------------------- theorem constants
def _iteration_ratios(p: KamParameters) -> tuple[Interval, Interval, Interval]:
    a1 = (p.rho - p.rho_inf) / (p.rho - p.delta * 2 - p.rho_inf)
    a2 = p.rho / p.rho_inf
    a3 = p.rho / p.delta
    return a1, a2, a3


def constants_theorem_single(fam: FamilyBounds, hyp: HypothesisConstants, params: KamParameters,
                             norm_e: Interval) -> dict[str, Any]:
    """One-step C1..C3, iteration constants, kappa, C4 and the frak-C constants."""
    g, tau, d, rho = params.gamma, params.tau, params.delta, params.rho
    s1, s2, sb = hyp.sigma1, hyp.sigma2, hyp.sigma_b
    cR = russmann_constant(tau)
    a1, a2, a3 = _iteration_ratios(params)
    one_ab = 1 + fam.c_alpha * sb * s2
    C1 = (1 + s1) * cR * one_ab * s2
    C2 = s1 * s2.sqr() * fam.c_alpha * C1 + fam.c_xalpha * s1 * s2 * C1 * d \
        + fam.c_alphaalpha * sb * s2.sqr() * g * power(d, tau + 1)
    C3 = C1 * g * power(d, tau - 1) + fam.c_xx * (s1 * C1).sqr() / 2 \
        + fam.c_xalpha * sb * s1 * s2 * C1 * g * power(d, tau) \
        + fam.c_alphaalpha * (sb * s2).sqr() * g.sqr() * power(d, tau * 2) / 2
    kappa = C3 * power(a1, tau * 2) * norm_e / (g.sqr() * power(d, tau * 2))
    out: dict[str, Any] = dict(c_R=cR, a1=a1, a2=a2, a3=a3, C1=C1, C2=C2, C3=C3, kappa=kappa)
    if not kappa.hi < 1:
        out.update(frakC1=Interval(math.inf), frakC2=Interval(math.inf), frakC3=Interval(math.inf))
        return out
    S_t = sigma_series(kappa, a1, tau)
    S_2t = sigma_series(kappa, a1, tau * 2)
    S_tm1 = sigma_series(kappa, a1, tau - 1)
    # one step bounds Delta_alpha by sigma_b sigma2 ||e||, while the iteration
    # condition is stated with sigma2 sigma1; the larger of the two covers both.
    s_alpha = s2 * s1.max(sb)
    C4_terms = {
        "dist_h": s1 * C1 * d * S_t / hyp.dist_h_boundary,
        "dist_alpha": s_alpha * S_2t * g * power(d, tau + 1) / hyp.dist_alpha_boundary,
        "sigma1": s1 * C1 * S_tm1 / (s1 - hyp.norm_dxh),
        "sigma2": s2.sqr() * s1 * C1 * S_tm1 / (s2 - hyp.norm_inv_dxh),
        "sigma_b": sb.sqr() * C2 * S_tm1 / (sb - hyp.inv_avg_b),
    }
    C4 = _imax(C4_terms.values())
    b1 = power(a1 * a3, tau * 2) * C3
    b2 = power(a3, tau + 1) * C4 * g * power(rho, tau - 1)
    out.update(Sigma_kappa_tau=S_t, Sigma_kappa_2tau=S_2t, Sigma_kappa_tau_m1=S_tm1, C4=C4,
               C4_terms=C4_terms, frakC1=b1.max(b2), frakC1_second_branch=bool(b2.hi > b1.hi),
               frakC2=power(a3, tau) * s1 * C1 * S_t, frakC3=sb * s2 * S_2t)
    return out


def _imax(items) -> Interval:
    items = list(items)
    acc = items[0]
    for it in items[1:]:
        acc = acc.max(it)
    return acc


def constants_theorem_lipschitz(fam: FamilyBounds, hyp: HypothesisConstants, params: KamParameters,
                                single: dict[str, Any], err: ErrorBounds) -> dict[str, Any]:
    g, tau, d, rho = params.gamma, params.tau, params.delta, params.rho
    s1, s2, s3, sb = hyp.sigma1, hyp.sigma2, hyp.sigma3, hyp.sigma_b
    b0, b1, b2 = hyp.beta0, hyp.beta1, hyp.beta2
    cR = single["c_R"]
    cRh = lipschitz_russmann_constant(tau)
    C1, C3 = single["C1"], single["C3"]
    a1, a3 = single["a1"], single["a3"]
    one_ab = 1 + fam.c_alpha * sb * s2
    mix = fam.c_alphaalpha * b2 + fam.c_xalpha * b0
    C0L = sb * s2.sqr() * (b1 + s3) * one_ab + s2.sqr() * sb.sqr() * mix
    C1L = s2 * (mix * sb * s2 + fam.c_alpha * C0L + one_ab * s2 * (b1 + s3))
    gd = g * power(d, tau + 1)
    C2L = cR * C1L * gd + cRh * one_ab * s2
    C3L = C2L * (s1 + 1) + b1 * cR * one_ab * s2 * gd
    C4L = b1 * C1 * gd + s1 * C3L
    sbs2 = sb * s2
    s1C1 = s1 * C1
    C5L = (C3L * g * power(d, tau - 1)
           + (fam.c_xxalpha * b2 + fam.c_xxx * b0) * s1C1.sqr() * gd / 2
           + (fam.c_xalphaalpha * b2 + fam.c_xxalpha * b0) * s1C1 * sbs2 * g.sqr() * power(d, tau * 2 + 1)
           + (fam.c_alphaalphaalpha * b2 + fam.c_xalphaalpha * b0) * sbs2.sqr() * g.sqr() * g
           * power(d, tau * 3 + 1) / 2
           + C4L * (fam.c_xx * s1C1 + fam.c_xalpha * sbs2 * g * power(d, tau))
           + C0L * g.sqr() * power(d, tau * 2 + 1) * (fam.c_xalpha * s1C1 + fam.c_alphaalpha * sbs2 * g * power(d, tau)))
    C6L = C3.max((C5L + C3 * 2) * power(a1, -tau - 1))
    E = err.weighted
    mu = C6L * power(a1, tau * 2) * E / (g.sqr() * power(d, tau * 2))
    out: dict[str, Any] = dict(c_R_hat=cRh, C0L=C0L, C1L=C1L, C2L=C2L, C3L=C3L, C4L=C4L, C5L=C5L,
                               C6L=C6L, mu=mu)
    if not mu.hi < 1 or "C4" not in single:
        out.update(frakC1L=Interval(math.inf), frakC2L=Interval(math.inf))
        return out
    S_m1 = sigma_series(mu, a1, -1.0)
    S_m2 = sigma_series(mu, a1, -2.0)
    S_tm1 = sigma_series(mu, a1, tau - 1)
    S_tm2 = sigma_series(mu, a1, tau - 2)
    C7L = C4L + s1C1
    C8L = C0L * gd + sbs2
    C9_terms = {
        "beta0": C7L * S_m1 * power(a3, tau * 2 + 1) * rho / (b0 - hyp.lip_h),
        "beta1": C7L * S_m2 * power(a3, tau * 2) / (b1 - hyp.lip_dxh),
        "beta2": C8L * S_tm1 * g * power(a3 * rho, tau + 1) / (b2 - hyp.lip_alpha),
        # sigma3 is part of hypothesis H1 for the Lipschitz theorem and has to be
        # propagated along the iteration like sigma1 and sigma2
        "sigma3": s1C1 * 2 * S_tm2 * g * power(a3, tau + 2) * power(rho, tau) / (s3 - hyp.norm_dxxh),
    }
    C9L = _imax(C9_terms.values())
    c1 = power(a1 * a3, tau * 2) * rho.sqr() * C6L
    c2 = power(a3, tau + 1) * single["C4"] * g * power(rho, tau + 1)
    frakC1L = _imax([c1, c2, C9L])
    frakC2L = power(a3, tau + 1) * C8L * S_tm1
    out.update(Sigma_mu_m1=S_m1, Sigma_mu_m2=S_m2, Sigma_mu_tau_m1=S_tm1, Sigma_mu_tau_m2=S_tm2,
               C7L=C7L, C8L=C8L, C9L=C9L, C9L_terms=C9_terms, frakC1L=frakC1L, frakC2L=frakC2L)
    return out


# ---------------------------------------------------------------- prepared candidate
def _iv(x: arb) -> Interval:
    return from_arb(x)


def _up(x: arb | Interval) -> Interval:
    v = x if isinstance(x, Interval) else from_arb(x)
    return Interval(max(v.hi, 0.0))


def _low(x: arb | Interval) -> Interval:
    v = x if isinstance(x, Interval) else from_arb(x)
    return Interval(v.lo)


@dataclass
class PreparedCandidate:
    """Everything about a candidate that does not depend on the strip widths.

    The expensive pieces (the composed jets and the shifted jets) are
    computed once so that the parameter search only redoes norms.
    """

    family: Any
    h: FourierTaylorModel
    alpha: ScalarJet
    e_jets: list[TrigPoly]
    e_remainder: TrigPoly
    dxh: FourierTaylorModel
    dxxh: FourierTaylorModel
    dth: FourierTaylorModel
    dxth: FourierTaylorModel
    dalpha: ScalarJet
    f_rem_grid: list[arb]
    h_rem: TrigPoly
    prec: int = DEFAULT_PREC

    @property
    def theta0(self) -> float:
        return self.h.theta0

    @property
    def rad(self) -> float:
        return self.h.rad

    @property
    def n(self) -> int:
        return self.h.n


def prepare_candidate(h: FourierTaylorModel, alpha: ScalarJet, family: FamilyEvaluator,
                      prec: int = DEFAULT_PREC) -> PreparedCandidate:
    if h.order < 1 or alpha.order != h.order:
        raise ValueError("h and alpha need a common order m >= 1")
    if h.theta0 != alpha.theta0 or h.rad != alpha.rad:
        raise ValueError("h and alpha must share theta0 and rad")
    with precision(prec):
        F, f_grid = family.jet_compose(h, alpha, with_grid=True)
        H = shifted_composition_jets(h)
        e_jets = [F.jets[s] - H.jets[s] for s in range(h.order + 1)]
        e_rem = F.remainder - H.remainder
        dxh = jet_derivative_x(h)
        dth = jet_derivative_theta(h)
        return PreparedCandidate(family, h, alpha, e_jets, e_rem, dxh.add_constant(1),
                                 jet_derivative_x(h, 2), dth, jet_derivative_x(dth),
                                 alpha.derivative(), f_grid, H.remainder, prec)


# ---------------------------------------------------------------- hypotheses
def _b_average(pc: PreparedCandidate) -> acb:
    """b~_{B,0}: grid mean of 1/d_x h(x_j + theta, theta) over theta in B (d_alpha f = 1)."""
    fb = enclose(pc.dxh).twist(as_arb(pc.theta0) + theta_ball(pc.rad))
    vals = idft(fb).values
    total = acb(0)
    for v in vals:
        total += 1 / v
    return total / len(vals)


def measure_estimates(pc: PreparedCandidate, rho: Interval) -> dict[str, Interval]:
    """The M / m quantities entering the hypotheses, all as enclosures."""
    with precision(pc.prec):
        r = to_arb(rho)
        h_pert = max_modulus_arb(pc.h, r)
        dxh_pert = max_modulus_arb(jet_derivative_x(pc.h), r)
        out = {
            "M_h_minus_id": _up(h_pert),
            "M_dxh_minus_1": _up(dxh_pert),
            "M_dxh": _up(max_modulus_arb(pc.dxh, r)),
            "m_dxh": _low(min_modulus_arb(pc.dxh, r)),
            "M_dxxh": _up(max_modulus_arb(pc.dxxh, r)),
            "M_dth": _up(max_modulus_arb(pc.dth, r)),
            "M_dxth": _up(max_modulus_arb(pc.dxth, r)),
            "dalpha": _iv(pc.dalpha.enclose_arb()),
        }
        out["inv_avg_b_tilde"] = _up(abs(1 / _b_average(pc)))
        out["s_N0"] = _up(aliasing_coefficient_bound_arb(0, pc.n, r))
    return out


def verify_h1_h2_h3(pc: PreparedCandidate, fam: FamilyBounds, params: KamParameters,
                    est: dict[str, Interval] | None = None) -> HypothesisConstants:
    """Hypothesis constants with the uniform slack params.sigma; raises HypothesisFailed."""
    est = measure_estimates(pc, params.rho) if est is None else est
    sig = params.sigma
    if not params.rho_hat > params.rho + est["M_h_minus_id"]:
        raise HypothesisFailed("rho_hat", "rho_hat <= rho + M(h - id)")
    if not est["M_dxh_minus_1"] < 1:
        raise HypothesisFailed("dxh_minus_1", "M(d_x h - 1) >= 1")
    m = est["m_dxh"]
    if not m > 0:
        raise HypothesisFailed("dxh_min", "m(d_x h) <= 0")
    inv_m = (1 / m).upper()
    inv_b = est["inv_avg_b_tilde"]
    c_b = est["s_N0"] * fam.c_alpha * inv_b / m
    if not c_b < 1:
        raise HypothesisFailed("twist", "c_b >= 1")
    inv_avg_b = (inv_b / (1 - c_b)).upper()
    dal = est["dalpha"]
    if dal.contains_zero():
        raise HypothesisFailed("alpha_prime", "0 in alpha'(B)")
    lip_a = Interval(abs(dal).lo)
    sup_a = Interval(abs(dal).hi)
    dist_h = params.rho_hat - params.rho - est["M_h_minus_id"]

    def slack(x: Interval) -> Interval:
        # the floor keeps beta - Lip > 0 when a bound is exactly 0 (epsilon = 0)
        return (x.max(SLACK_FLOOR) * sig).upper()

    return HypothesisConstants(
        sigma1=slack(est["M_dxh"]), sigma2=slack(inv_m), sigma3=slack(est["M_dxxh"]),
        sigma_b=slack(inv_avg_b), beta0=slack(est["M_dth"]), beta1=slack(est["M_dxth"]),
        beta2=slack(sup_a), lip_lb_alpha=lip_a, dist_h_boundary=dist_h.lower(),
        dist_alpha_boundary=Interval(1.0), norm_dxh=est["M_dxh"], norm_inv_dxh=inv_m,
        norm_dxxh=est["M_dxxh"], inv_avg_b=inv_avg_b, lip_h=est["M_dth"],
        lip_dxh=est["M_dxth"], lip_alpha=sup_a)


# ---------------------------------------------------------------- conjugacy error
def _three_lines_remainder(pc: PreparedCandidate, rho: arb, rho_t: arb, FB: arb) -> arb:
    """Sup-norm bound of the order-(m+1) remainder of e on the strip of width rho.

    The remainder is an average over xi in B of analytic g_xi.  On the real
    line |g_xi| is controlled by the grid samples (midpoint DFT, plus
    sqrt(N) max width by Parseval, plus aliasing); on Im x = rho~ by the
    majorant.  Hadamard's three-lines theorem interpolates in between.
    """
    n = pc.n
    hg = idft(pc.h_rem).values
    diff = [acb(f) - v for f, v in zip(pc.f_rem_grid, hg)]
    mids = [acb(d.mid()) for d in diff]
    width = arb(0)
    for d, c in zip(diff, mids):
        w = abs(d - c).upper()
        if w > width:
            width = w
    from .fourier import GridSamples, dft
    mid_norm = fourier_norm_arb(dft(GridSamples(n, mids)), 0)
    M_t = FB + fourier_norm_arb(pc.h_rem, rho_t)
    M_0 = mid_norm + width * arb(n).sqrt() + dft_function_error_bound_arb(arb(0), rho_t, n) * M_t
    if not (M_0 > 0 and M_t > 0):
        return M_0.max(M_t) if M_0.is_finite() else arb.pos_inf()
    lam = rho / rho_t
    return ((1 - lam) * M_0.log() + lam * M_t.log()).exp()


def bound_conjugacy_error(pc: PreparedCandidate, fam: FamilyBounds, params: KamParameters) -> ErrorBounds:
    """Bounds of ||e||_{B,rho}, Lip_{B,rho}(e) and the weighted error E."""
    m = pc.h.order
    with precision(pc.prec):
        rho, rho_t = to_arb(params.rho), to_arb(params.rho_tilde)
        r = arb(pc.rad)
        h0_size = max_modulus_arb(pc.h.jets[0], rho_t)
        if not fam.r > _up(h0_size) + params.rho_tilde:
            raise HypothesisFailed("analyticity", "r <= rho~ + M(h^[0])")
        e_norms = [fourier_norm_arb(p, rho) for p in pc.e_jets]
        Fs, FB = pc.family.model_majorants(pc.h, pc.alpha, rho_t)
        if not all(f.is_finite() for f in Fs) or not FB.is_finite():
            raise HypothesisFailed("majorant", "non-finite majorant")
        C_T_fourier = fourier_norm_arb(pc.e_remainder, rho)
        C_T_lines = _three_lines_remainder(pc, rho, rho_t, FB)
        C_T = C_T_fourier.upper().min(C_T_lines.upper())
        C_F = _horner(Fs + [FB], r)
        dF = [Fs[s] * s for s in range(1, m + 1)] + [FB * (m + 1)]
        C_Fp = _horner(dF, r)
        C_N = dft_function_error_bound_arb(rho, rho_t, pc.n)
        if not C_N.is_finite():
            raise HypothesisFailed("dft", "C_N infinite (rho = rho~)")
        norm_e = _horner(e_norms + [C_T], r) + C_F * C_N
        de = [e_norms[s] * s for s in range(1, m + 1)] + [C_T * (m + 1)]
        lip_e = _horner(de, r) + C_Fp * C_N
        ne, le = _up(norm_e), _up(lip_e)
    weighted = ne.max(params.gamma * power(params.delta, params.tau + 1) * le).upper()
    details = dict(C_T=_up(C_T), C_T_fourier=_up(C_T_fourier), C_T_three_lines=_up(C_T_lines), C_F=_up(C_F), C_F_prime=_up(C_Fp), C_N=_up(C_N),
                   jet_norms=[_up(x) for x in e_norms], M_h0_rho_tilde=_up(h0_size))
    return ErrorBounds(ne, le, weighted, details)


# ---------------------------------------------------------------- verdict
@dataclass
class ValidationReport:
    interval: RotationInterval
    verdict: str
    params: KamParameters
    dio: DiophantineParams
    estimates: dict = field(default_factory=dict)
    hypothesis: HypothesisConstants | None = None
    errors: ErrorBounds | None = None
    single: dict = field(default_factory=dict)
    lipschitz: dict = field(default_factory=dict)
    check_single: Interval | None = None
    check_lipschitz: Interval | None = None
    measure_lb: Interval = Interval(0.0)
    seconds: float = 0.0
    notes: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.verdict == "Certified"

    @property
    def relative_measure_lb(self) -> Interval:
        return (self.measure_lb / self.interval.width.upper()).lower()

    def to_dict(self) -> dict:
        return _jsonable({
            "interval": {"lo": self.interval.lo, "hi": self.interval.hi},
            "verdict": self.verdict,
            "parameters": {f.name: getattr(self.params, f.name) for f in fields(self.params)},
            "diophantine": {"gamma": self.dio.gamma, "tau": self.dio.tau,
                            "relative_measure_lb": self.dio.relative_measure_lb, "Q": self.dio.q_max},
            "estimates": self.estimates,
            "hypothesis": ({f.name: getattr(self.hypothesis, f.name) for f in fields(self.hypothesis)}
                           if self.hypothesis else None),
            "errors": ({"norm_e": self.errors.norm_e, "lip_e": self.errors.lip_e,
                        "weighted": self.errors.weighted, **self.errors.details}
                       if self.errors else None),
            "single": self.single,
            "lipschitz": self.lipschitz,
            "check_single": self.check_single,
            "check_lipschitz": self.check_lipschitz,
            "measure_lb": self.measure_lb,
            "relative_measure_lb": self.relative_measure_lb,
            "seconds": self.seconds,
            "notes": self.notes,
        })

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _num(x: float) -> str:
    return repr(float(x))


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, Interval):
        return {"lo": _num(obj.lo), "hi": _num(obj.hi)}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float):
        return _num(obj)
    return obj


def _covers(pc: PreparedCandidate, B: RotationInterval) -> bool:
    from fractions import Fraction as Fr
    t0, r = Fr(pc.theta0), Fr(pc.rad)
    return t0 - r <= Fr(B.lo) and Fr(B.hi) <= t0 + r


def certify_interval(pc: PreparedCandidate, dio: DiophantineParams, params: KamParameters,
                     B: RotationInterval | None = None,
                     est: dict[str, Interval] | None = None) -> ValidationReport:
    """Run the full chain for one rotation interval; every failure becomes a verdict."""
    t0 = time.perf_counter()
    if B is None:
        B = RotationInterval(pc.theta0 - pc.rad, pc.theta0 + pc.rad)
    rep = ValidationReport(B, "Certified", params, dio)

    def done(verdict: str) -> ValidationReport:
        rep.verdict = verdict
        rep.seconds = time.perf_counter() - t0
        return rep

    if not _covers(pc, B):
        return done("ConditionFailed:interval-cover")
    if params.domain_error():
        rep.notes["domain"] = params.domain_error()
        return done("ConditionFailed:parameter-domain")
    if not dio.tau.lo >= 1 or not dio.gamma.lo > 0:
        return done("ConditionFailed:parameter-domain")
    fam = pc.family.bounds(params.rho_hat)
    try:
        est = measure_estimates(pc, params.rho) if est is None else est
        rep.estimates = est
        hyp = verify_h1_h2_h3(pc, fam, params, est)
        rep.hypothesis = hyp
        err = bound_conjugacy_error(pc, fam, params)
    except HypothesisFailed as exc:
        rep.notes["hypothesis"] = str(exc)
        return done(f"HypothesisFailed:{exc.name}")
    rep.errors = err
    g, tau, rho = params.gamma, params.tau, params.rho
    try:
        single = constants_theorem_single(fam, hyp, params, err.norm_e)
        rep.single = single
        if not single["kappa"].hi < 1:
            return done("ConditionFailed:kappa")
        rep.check_single = single["frakC1"] * err.norm_e / (g.sqr() * power(rho, tau * 2))
        lip = constants_theorem_lipschitz(fam, hyp, params, single, err)
        rep.lipschitz = lip
    except IntervalError as exc:
        rep.notes["series"] = str(exc)
        return done("ConditionFailed:series")
    if not lip["mu"].hi < 1:
        return done("ConditionFailed:mu")
    check = lip["frakC1L"] * err.weighted / (g.sqr() * power(rho, tau * 2 + 2))
    rep.check_lipschitz = check
    if not check.hi < 1:
        return done("ConditionFailed:lipschitz-check")
    defect = lip["frakC2L"] * err.weighted / (g * power(rho, tau + 1))
    rep.notes["measure_defect"] = defect
    meas = (hyp.lip_lb_alpha - defect) * dio.relative_measure_lb * B.width.lower()
    rep.measure_lb = Interval(max(meas.lo, 0.0))
    return done("Certified")


# ---------------------------------------------------------------- parameter search
SEARCH_FACTORS = (2.0, 1.25, 1.06)


def _objective(rep: ValidationReport) -> float:
    """Lipschitz check quantity; failed runs get a finite penalty when a
    smallness quantity is available, so the descent can climb out of them."""
    if rep.certified:
        return rep.check_lipschitz.hi
    if rep.check_lipschitz is not None:
        return 1.0 + math.log1p(rep.check_lipschitz.hi)
    for key, src in (("mu", rep.lipschitz), ("kappa", rep.single)):
        if key in src and math.isfinite(src[key].hi):
            return 100.0 + math.log1p(src[key].hi)
    return math.inf


def search_parameters(pc: PreparedCandidate, dio: DiophantineParams, seed: KamParameters,
                      B: RotationInterval | None = None, sweeps: int = 3,
                      factors: tuple[float, ...] = SEARCH_FACTORS) -> ValidationReport:
    """Deterministic coordinate descent on log-scaled strip parameters and slack.

    rho_hat is searched as a multiplier over rho + M(h - id), the rest as
    ratios to rho.  Minimizes the Lipschitz check quantity and returns the
    best report found.
    """
    coords = ["rho", "tilde", "hat", "delta", "inf", "sigma"]
    r0 = seed.rho.mid
    state = {"rho": r0, "hat": 1.05, "delta": seed.delta.mid / r0, "inf": seed.rho_inf.mid / r0,
             "tilde": seed.rho_tilde.mid / r0, "sigma": seed.sigma}
    est_cache: dict[float, dict] = {}
    B = B or RotationInterval(pc.theta0 - pc.rad, pc.theta0 + pc.rad)

    def run(st: dict) -> ValidationReport:
        rho = st["rho"]
        if rho not in est_cache:
            est_cache[rho] = measure_estimates(pc, Interval(rho))
        est = est_cache[rho]
        rho_hat = (est["M_h_minus_id"].hi + rho) * st["hat"]
        p = KamParameters.from_ratios(rho, seed.gamma, seed.tau, rho_hat, st["delta"], st["inf"],
                                      st["tilde"], st["sigma"])
        if p.domain_error() or st["hat"] <= 1:
            return ValidationReport(B, "ConditionFailed:parameter-domain", p, dio)
        return certify_interval(pc, dio, p, B, est)

    def moved(st: dict, c: str, mult: float) -> dict:
        trial = dict(st)
        if c in ("sigma", "hat"):
            trial[c] = 1 + (st[c] - 1) * mult
        else:
            trial[c] = st[c] * mult
        return trial

    best = run(state)
    best_val = _objective(best)
    evals = 1
    for _ in range(sweeps):
        improved = False
        for f in factors:
            for c in coords:
                for mult in (f, 1 / f):
                    trial = moved(state, c, mult)
                    rep = run(trial)
                    evals += 1
                    val = _objective(rep)
                    if not val < best_val:
                        continue
                    # keep going while the direction pays off
                    while val < best_val:
                        best, best_val, state, improved = rep, val, trial, True
                        trial = moved(state, c, mult)
                        rep = run(trial)
                        evals += 1
                        val = _objective(rep)
                    break
        if not improved:
            break
    best.notes["search_evaluations"] = evals
    return best


def default_seed(gamma: Interval, tau: Interval, rho: float = 1.060779991992726e-2,
                 hat_ratio: float = 3.5, sigma: float = 1.01) -> KamParameters:
    return KamParameters.from_ratios(rho, gamma, tau, rho * hat_ratio, sigma=sigma)


# ---------------------------------------------------------------- corollary
def asymptotic_corollary(epsilon: Interval | float, g_norm: Interval | float, frakC1L: Interval,
                         frakC2L: Interval, rho: Interval | float, gamma: Interval | float,
                         tau: Interval | float, delta: Interval | float) -> Interval:
    """Lower bound of the relative measure of conjugate parameters for x + alpha + eps g(x).

    frakC1L, frakC2L are the constants of the identity candidate.
    """
    eps, gn = as_interval(epsilon), as_interval(g_norm)
    rho, gamma, tau, delta = map(as_interval, (rho, gamma, tau, delta))
    small = eps * frakC1L * gn / (gamma.sqr() * power(delta, tau * 2 + 2))
    if not small.hi < 1:
        raise ValueError("smallness condition of the asymptotic bound fails")
    from .diophantine import dirichlet_limit
    lead = 1 - eps * frakC2L * gn / (gamma * power(rho, tau + 1))
    return (lead * dirichlet_limit(gamma, tau)).lower()
