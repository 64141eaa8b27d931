"""The Arnold family f_alpha(x) = x + alpha + (eps / 2 pi) sin(2 pi x)."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np
from flint import acb, arb, fmpq

from .fourier import (DEFAULT_PREC, TrigPoly, as_arb, dft, fft, fourier_norm_arb, freq,
                      GridSamples, idft, precision)
from .interval import Interval, as_interval, cosh, from_arb, to_arb, PI
from .taylor import (FourierTaylorModel, ScalarJet, SmallDivisorError, fattened_jets,
                     fattened_scalars, small_divisor_floor)

if TYPE_CHECKING:
    from .kam import FamilyBounds

log = logging.getLogger(__name__)

ENTIRE_R = 1e300  # stand-in for r = +inf (the family is entire)


@dataclass(frozen=True)
class ArnoldFamily:
    epsilon: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError("epsilon must lie in [0, 1)")

    @property
    def eps_arb(self) -> arb:
        return as_arb(self.epsilon)

    def __call__(self, x: float, alpha: float) -> float:
        return x + alpha + self.epsilon / (2 * math.pi) * math.sin(2 * math.pi * x)

    def bounds(self, rho_hat: Interval | float) -> "FamilyBounds":
        return family_bounds(self, rho_hat)

    def jet_compose(self, h: FourierTaylorModel, alpha: ScalarJet, with_grid: bool = False):
        return jet_compose(self, h, alpha, with_grid)

    def model_majorants(self, h: FourierTaylorModel, alpha: ScalarJet,
                        rho_t: arb) -> tuple[list[arb], arb]:
        return model_majorants(self, h, alpha, rho_t)


def family_bounds(fam: ArnoldFamily, rho_hat: Interval | float) -> "FamilyBounds":
    from .kam import FamilyBounds

    rho_hat = as_interval(rho_hat)
    eps = as_interval(fam.epsilon)
    ch = eps * cosh(PI * 2 * rho_hat)
    zero = Interval(0.0)
    return FamilyBounds(
        c_x=ch + 1, c_alpha=Interval(1.0), c_xx=PI * 2 * ch, c_xalpha=zero, c_alphaalpha=zero,
        c_xxx=PI.sqr() * 4 * ch, c_xxalpha=zero, c_xalphaalpha=zero, c_alphaalphaalpha=zero,
        rho_hat=rho_hat, r=Interval(ENTIRE_R))


# ---------------------------------------------------------------- grid recurrences
def _grid_nodes(n: int) -> list[arb]:
    return [arb(fmpq(j, n)) for j in range(n)]


def grid_values(poly: TrigPoly) -> list[arb]:
    """Real parts of the samples at x_j = j/N (exact for real-analytic data)."""
    return [v.real for v in idft(poly).values]


def compose_grid(eps: arb, hg: Sequence[Sequence[arb]], alphas: Sequence[arb],
                 upto: int) -> list[list[arb]]:
    """F^[s](x_j) - [s = 0] x_j for s <= upto via the sin/cos recurrences.

    hg[s] are the grid values of h^[s] (h - id); missing orders count as 0.
    """
    n = len(hg[0])
    nodes = _grid_nodes(n)
    two_pi = 2 * arb.pi()
    S: list[list[arb]] = [[], ]
    C: list[list[arb]] = [[], ]
    for j in range(n):
        s0, c0 = arb.sin_cos_pi(2 * (nodes[j] + hg[0][j]))
        S[0].append(s0)
        C[0].append(c0)
    coef = eps / two_pi
    out = []
    zero = arb(0)
    for s in range(upto + 1):
        if s > 0:
            Ss = [zero] * n
            Cs = [zero] * n
            for j in range(s):
                if s - j >= len(hg):
                    continue
                hs = hg[s - j]
                w = two_pi * (s - j) / s
                Sj, Cj = S[j], C[j]
                Ss = [a + w * h * c for a, h, c in zip(Ss, hs, Cj)]
                Cs = [a - w * h * v for a, h, v in zip(Cs, hs, Sj)]
            S.append(Ss)
            C.append(Cs)
        h_s = hg[s] if s < len(hg) else None
        a_s = alphas[s] if s < len(alphas) else zero
        row = []
        for j in range(n):
            v = coef * S[s][j] + a_s
            if h_s is not None:
                v = v + h_s[j]
            row.append(v)
        out.append(row)
    return out


def _grid_dft(values: Sequence[arb]) -> TrigPoly:
    return dft(GridSamples(len(values), [acb(v) for v in values]))


def jet_compose(fam: ArnoldFamily, h: FourierTaylorModel, alpha: ScalarJet,
                with_grid: bool = False):
    """DFT approximations of F(x, theta) - x = f(h(x, theta), alpha(theta)) - x.

    The jets are the discrete transforms of F^[s](x_j), s <= m.  The
    remainder is the transform of F_B^[m+1](x_j) evaluated with the fattened
    objects h_B, alpha_B and h^[m+1] = alpha^[m+1] = 0.  With with_grid the
    raw remainder samples F_B^[m+1](x_j) are returned as well.
    """
    m = h.order
    eps = fam.eps_arb
    hg = [grid_values(j) for j in h.jets]
    alphas = [alpha.coeff(s) for s in range(m + 1)]
    F = compose_grid(eps, hg, alphas, m)
    jets = [_grid_dft(row) for row in F]
    hb = fattened_jets(h)
    hbg = [grid_values(j) for j in hb]
    ab = fattened_scalars(alpha)
    FB = compose_grid(eps, hbg, ab, m + 1)
    rem = _grid_dft(FB[m + 1])
    for p in jets + [rem]:
        p.real = True
    model = FourierTaylorModel(h.theta0, h.rad, jets, rem)
    return (model, FB[m + 1]) if with_grid else model


def majorant_arb(eps: arb, h_norms: Sequence[arb], alpha_abs: Sequence[arb], rho_t: arb,
                 h0_norm: arb, upto: int, linear: bool = True) -> list[arb]:
    """calF_s = ||h^[s]|| + |alpha^[s]| + (eps / 2 pi) calS_s, s <= upto; absent orders are 0.

    linear=False drops the first two terms (only the sine part).
    """
    two_pi = 2 * arb.pi()
    S = [(two_pi * (rho_t + h0_norm)).cosh()]
    out = []
    for s in range(upto + 1):
        if s > 0:
            acc = arb(0)
            for j in range(s):
                if s - j < len(h_norms):
                    acc += (s - j) * h_norms[s - j] * S[j]
            S.append(two_pi * acc / s)
        hn = h_norms[s] if s < len(h_norms) else arb(0)
        an = alpha_abs[s] if s < len(alpha_abs) else arb(0)
        out.append((hn + an if linear else 0) + eps / two_pi * S[s])
    return out


def majorant(fam: ArnoldFamily, h_norms: Sequence[Interval | float], alpha_abs: Sequence[Interval | float],
             rho_t: Interval | float, upto: int | None = None) -> list[Interval]:
    """Upper bounds calF_0..calF_upto; h_norms[0] is ||h^[0]||^F at rho_t."""
    hn = [to_arb(as_interval(v)) for v in h_norms]
    an = [to_arb(as_interval(v)) for v in alpha_abs]
    upto = len(hn) if upto is None else upto
    vals = majorant_arb(fam.eps_arb, hn, an, to_arb(as_interval(rho_t)), hn[0], upto)
    return [Interval(from_arb(v).hi) for v in vals]


def model_majorants(fam: ArnoldFamily, h: FourierTaylorModel, alpha: ScalarJet,
                    rho_t: arb) -> tuple[list[arb], arb]:
    """Majorants of the parts of F^[s] the DFT does not reproduce, s <= m, and calF_{B,m+1}.

    h^[s] has degree < N/2 and alpha^[s] is constant, so N-point sampling
    recovers both exactly; only the sine part aliases.
    """
    m = h.order
    eps = fam.eps_arb
    norms = [fourier_norm_arb(j, rho_t) for j in h.jets]
    F = majorant_arb(eps, norms, [], rho_t, norms[0], m, linear=False)
    hb = fattened_jets(h)
    nb = [fourier_norm_arb(j, rho_t) for j in hb]
    ab = [abs(a) for a in fattened_scalars(alpha)]
    FB = majorant_arb(eps, nb, ab, rho_t, nb[0], m + 1)
    return F, FB[m + 1]


# ---------------------------------------------------------------- candidates
class CandidateError(RuntimeError):
    """Continuation or Newton failed to converge."""


def _float_newton(uh: np.ndarray, al: float, eps: float, theta: float, iters: int = 30,
                  tol: float = 1e-14) -> tuple[np.ndarray, float, float, list[float]]:
    """Quasi-Newton in double precision; uh are FFT-order coefficients of h - id."""
    n = len(uh)
    k = np.fft.fftfreq(n, 1.0 / n)
    x = np.arange(n) / n
    rot = np.exp(2j * np.pi * k * theta)
    div = rot - 1
    div[0] = 1
    history: list[float] = []
    for _ in range(iters):
        grid = lambda c: np.fft.ifft(c).real * n
        dk = 2j * np.pi * k * uh
        u, up, us, ups = grid(uh), grid(dk), grid(uh * rot), grid(dk * rot)
        e = u + al + eps / (2 * np.pi) * np.sin(2 * np.pi * (x + u)) - theta - us
        err = float(np.abs(e).max())
        history.append(err)
        if err < tol:
            break
        if len(history) > 5 and history[-1] > history[-6] / 2:
            raise CandidateError(f"float Newton stagnated at {err:.3e}")
        a, b = e / (1 + ups), 1 / (1 + ups)
        dal = -a.mean() / b.mean()
        ph = np.fft.fft(a + b * dal) / n / div
        ph[0] = 0
        phi = grid(ph)
        phi0 = -np.mean((1 + up) * phi)
        dh = np.fft.fft((1 + up) * (phi + phi0)) / n
        dh[0] = 0
        dh[n // 2] = 0
        uh = uh + dh
        al += dal
    return uh, al, history[-1], history


def float_continuation(eps: float, theta: float, n: int, tol: float = 1e-13,
                       steps: int = 64) -> tuple[np.ndarray, float]:
    """Continuation in epsilon from the rotation (h = id, alpha = theta)."""
    uh = np.zeros(n, complex)
    al = theta
    if eps == 0:
        return uh, al
    cur = 0.0
    step = eps / steps
    while cur < eps:
        nxt = min(eps, cur + step)
        try:
            uh2, al2, err, _ = _float_newton(uh.copy(), al, nxt, theta, tol=tol)
            if not err < tol:
                raise CandidateError(f"no convergence at eps={nxt}")
        except CandidateError:
            step /= 2
            if step < eps * 2.0**-20:
                raise
            continue
        uh, al, cur = uh2, al2, nxt
    return uh, al


class _Spectral:
    """High-precision helpers on FFT-order acb coefficient lists (midpoints only)."""

    def __init__(self, n: int, theta: arb, eps: arb):
        self.n = n
        self.theta = theta
        self.eps = eps
        self.two_pi = 2 * arb.pi()
        self.k = [freq(i, n) for i in range(n)]
        self.rot = [acb.exp_pi_i(acb(2 * k * theta)) for k in self.k]
        self.div = [r - 1 if k else acb(1) for r, k in zip(self.rot, self.k)]
        self.nodes = _grid_nodes(n)
        self.inv_n = arb(fmpq(1, n))

    def grid(self, c: Sequence[acb]) -> list[arb]:
        return [v.real.mid() for v in fft(c, inverse=True)]

    def coeffs(self, g: Sequence[arb]) -> list[acb]:
        return [(v * self.inv_n) for v in fft([acb(x) for x in g])]

    def deriv(self, c: Sequence[acb]) -> list[acb]:
        return [ci * acb(0, self.two_pi * k) if k else acb(0) for ci, k in zip(c, self.k)]

    def shift(self, c: Sequence[acb]) -> list[acb]:
        return [ci * r for ci, r in zip(c, self.rot)]

    def clean(self, c: Sequence[acb], rel: arb, normalized: bool = True,
              kmax: int | None = None) -> list[acb]:
        """Midpoints, exact real symmetry, N/2 slot and (optionally) the mean set to 0,
        coefficients below rel * max or beyond |k| = kmax dropped."""
        n = self.n
        mags = [abs(ci.mid()) for ci in c]
        big = max(mags, key=lambda a: float(a.mid())) if mags else arb(0)
        cut = big * rel
        out = [acb(0)] * n
        top = n // 2 if kmax is None else min(n // 2, kmax + 1)
        for i in range(1, top):
            ci = c[i].mid()
            if mags[i] < cut:
                continue
            sym = (ci + c[n - i].mid().conjugate()) / 2
            out[i] = sym.mid()
            out[n - i] = sym.conjugate().mid()
        if not normalized:
            out[0] = acb(c[0].real.mid())
        return out


def _spectral_extent(c: Sequence[acb], ks: Sequence[int], floor: arb) -> int:
    top = 0
    for ci, k in zip(c, ks):
        if abs(k) > top and abs(ci) > floor:
            top = abs(k)
    return top


def _newton_error(sp: _Spectral, uc: list[acb], al: arb) -> tuple[list[arb], dict]:
    u = sp.grid(uc)
    du = sp.deriv(uc)
    up, us, ups = sp.grid(du), sp.grid(sp.shift(uc)), sp.grid(sp.shift(du))
    c = sp.eps / sp.two_pi
    e = []
    for j in range(sp.n):
        s, _ = arb.sin_cos_pi(2 * (sp.nodes[j] + u[j]))
        e.append((u[j] + al + c * s - sp.theta - us[j]).mid())
    return e, {"up": up, "ups": ups}


def _linear_solve(sp: _Spectral, e: Sequence[arb], up: Sequence[arb],
                  ups: Sequence[arb]) -> tuple[list[acb], arb]:
    """(dh, dalpha) with Df(h) dh - dh(. + theta) + dalpha = -e via the group structure."""
    n = sp.n
    a = [(ei / (1 + w)).mid() for ei, w in zip(e, ups)]
    b = [(1 / (1 + w)).mid() for w in ups]
    mean = lambda g: sum(g, arb(0)) * sp.inv_n
    dal = (-mean(a) / mean(b)).mid()
    eta = [(ai + bi * dal).mid() for ai, bi in zip(a, b)]
    eh = sp.coeffs(eta)
    ph = [acb(0)] + [(eh[i] / sp.div[i]).mid() for i in range(1, n)]
    phi = sp.grid(ph)
    phi0 = -mean([(1 + w) * p for w, p in zip(up, phi)])
    dh = sp.coeffs([((1 + w) * (p + phi0)).mid() for w, p in zip(up, phi)])
    return dh, dal


def _error_jet(sp: _Spectral, H: list[list[acb]], A: list[arb], s: int) -> list[acb]:
    """Coefficients of e^[s] = F^[s] - H^[s] for the current jets."""
    hg = [sp.grid(c) for c in H]
    F = compose_grid(sp.eps, hg, A, s)[s]
    Fc = sp.coeffs([v.mid() for v in F])
    two_pi = sp.two_pi
    out = []
    for i, k in enumerate(sp.k):
        acc = acb(0)
        for j in range(0, s + 1):
            if s - j >= len(H):
                continue
            c = H[s - j][i]
            if c.is_zero() or (j and not k):
                continue
            acc += c * acb(0, two_pi * k) ** j / math.factorial(j) if j else c
        acc = acc * sp.rot[i]
        if i == 0:
            acc += sp.theta if s == 0 else (1 if s == 1 else 0)
        out.append((Fc[i] - acc).mid())
    return out


STAGNATION_FLOOR = 2.0 ** -100


def lindstedt_candidate(fam: ArnoldFamily, theta0: float, m: int, n: int, tol: float | None = None,
                        prec: int = DEFAULT_PREC, refine: int = 2,
                        history: list[float] | None = None) -> tuple[FourierTaylorModel, ScalarJet]:
    """Non-rigorous Lindstedt series (h - id, alpha) of order m at theta0.

    Float continuation in epsilon, high-precision quasi-Newton at theta0 until
    ||e||_0 < tol, then orders 1..m from the linearized equation at theta0.
    """
    if n < 4 or n & (n - 1):
        raise ValueError("n must be a power of two >= 4")
    if tol is None:
        tol = 2.0 ** -(prec - 40)
    for k in range(1, n // 2 + 1):
        d = abs(2 * math.sin(math.pi * k * theta0))
        if d < small_divisor_floor(k):
            raise SmallDivisorError(f"small divisor at k={k}: {d:.3e}")
    eps = fam.epsilon
    with precision(prec):
        theta = arb(theta0)
        sp = _Spectral(n, theta, fam.eps_arb)
        rel = arb(2) ** -(prec - 24)
        uh, al = float_continuation(eps, theta0, n)
        # the float seed carries ~1e-18 noise up to N/2; it would decay only linearly
        uc = sp.clean([acb(complex(v)) for v in uh], arb(2) ** -46)
        a0 = arb(al)
        hist = [] if history is None else history
        kmax = None
        if eps:
            extra = 1  # one step past tol pushes the residual to the precision floor
            for _ in range(40):
                e, aux = _newton_error(sp, uc, a0)
                err = max(abs(v) for v in e)
                hist.append(float(err))
                if err < tol:
                    if not extra:
                        break
                    extra -= 1
                if len(hist) > 5 and hist[-1] > hist[-6] / 2:
                    if err < STAGNATION_FLOOR:
                        # truncation floor of this N: accept and cut the spectrum there
                        tol = float(max(hist[-6:]))
                        break
                    raise CandidateError(f"Newton stagnated at {float(err):.3e}")
                dh, dal = _linear_solve(sp, e, aux["up"], aux["ups"])
                uc = sp.clean([u + d for u, d in zip(uc, dh)], rel)
                a0 = (a0 + dal).mid()
            else:
                raise CandidateError("Newton did not reach the tolerance")
            # spectral cutoff: beyond the last coefficient of h^[0] above tol
            # only rounding noise is left, which the orders s > 0 amplify by (2 pi k)^s
            kmax = _spectral_extent(uc, sp.k, arb(tol))
            uc = sp.clean(uc, rel, kmax=kmax)
        _, aux = _newton_error(sp, uc, a0)
        H = [uc]
        A = [a0]
        for s in range(1, m + 1):
            H.append([acb(0)] * n)
            A.append(arb(0))
            for _ in range(1 + refine):
                E = sp.grid(_error_jet(sp, H, A, s))
                dh, dal = _linear_solve(sp, E, aux["up"], aux["ups"])
                H[s] = sp.clean([u + d for u, d in zip(H[s], dh)], rel, kmax=kmax)
                A[s] = (A[s] + dal).mid()
        jets = [TrigPoly(n, c, real=True, normalized=True) for c in H]
    log.info("candidate eps=%s theta0=%r alpha0=%s", eps, theta0, A[0].str(20))
    return FourierTaylorModel(theta0, 0.0, jets), ScalarJet(theta0, 0.0, A)


# ---------------------------------------------------------------- phase locking
TONGUE_GRID = 4096
TONGUE_STEP = 1e-9


def _alpha_star(eps: float, xs: np.ndarray, p: int, q: int) -> np.ndarray:
    """For each x the unique alpha with f_alpha^q(x) = x + p (G is increasing in alpha)."""
    lo = np.full_like(xs, p / q - 0.5)
    hi = np.full_like(xs, p / q + 0.5)
    c = eps / (2 * math.pi)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        y = xs.copy()
        for _ in range(q):
            y = y + mid + c * np.sin(2 * math.pi * y)
        pos = y - xs - p > 0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    return 0.5 * (lo + hi)


def _orbit_residual(eps: Interval, alpha: Interval, x: Interval, p: int, q: int) -> tuple[Interval, Interval]:
    """G(x) = f^q(x) - x - p and G'(x) = prod f'(x_i) - 1 in interval arithmetic."""
    from .interval import cos, sin
    c = eps / (PI * 2)
    y, d = x, Interval(1.0)
    for _ in range(q):
        d = d * (1 + eps * cos(PI * 2 * y))
        y = y + alpha + c * sin(PI * 2 * y)
    return y - x - p, d - 1


def _certify_orbit(eps: Interval, alpha: float, x0: float, p: int, q: int, r: float = 1e-9) -> bool:
    """Interval Newton: N(X) inside X proves a p/q periodic point in X."""
    a = Interval(alpha)
    X = Interval(x0 - r, x0 + r)
    g0, _ = _orbit_residual(eps, a, Interval(x0), p, q)
    _, dX = _orbit_residual(eps, a, X, p, q)
    if dX.contains_zero():
        return False
    N = Interval(x0) - g0 / dX
    return N.interior_subset(X)


def _root_near(eps: float, alpha: float, xs: np.ndarray, k: int, stars: np.ndarray,
               p: int, q: int) -> float | None:
    """Bisect G(., alpha) between grid point k (G > 0) and the nearest neighbour with G < 0."""
    c = eps / (2 * math.pi)

    def G(x: float) -> float:
        y = x
        for _ in range(q):
            y = y + alpha + c * math.sin(2 * math.pi * y)
        return y - x - p

    n = len(xs)
    for step in range(1, n // 2):
        j = (k + step) % n
        if (stars[j] - alpha) * (stars[k] - alpha) < 0:
            a, b = xs[k], xs[j] if j > k else xs[j] + 1.0
            ga = G(a)
            for _ in range(80):
                mid = 0.5 * (a + b)
                gm = G(mid)
                if (gm > 0) == (ga > 0):
                    a, ga = mid, gm
                else:
                    b = mid
            return 0.5 * (a + b)
    return None


def tongue_width_lb(fam: ArnoldFamily, p: int, q: int, grid: int = TONGUE_GRID,
                    step: float = TONGUE_STEP) -> Interval:
    """Certified lower bound of the width of the p/q phase-locking interval (0 on failure).

    The rotation number is monotone in alpha, so two parameters alpha_l <
    alpha_r with certified p/q periodic orbits enclose a locked interval.
    """
    if fam.epsilon == 0.0:
        return Interval(0.0)
    eps_i = as_interval(fam.epsilon)
    xs = (np.arange(grid) + 0.5) / grid
    stars = _alpha_star(fam.epsilon, xs, p, q)
    ends = []
    for k, sign in ((int(np.argmin(stars)), 1.0), (int(np.argmax(stars)), -1.0)):
        alpha = float(stars[k]) + sign * step
        x0 = _root_near(fam.epsilon, alpha, xs, k, stars, p, q)
        if x0 is None or not _certify_orbit(eps_i, alpha, x0, p, q):
            log.info("tongue %d/%d: boundary orbit not certified", p, q)
            return Interval(0.0)
        ends.append(alpha)
    width = Interval(ends[1]) - Interval(ends[0])
    return Interval(max(width.lo, 0.0))


def periodic_orbit_bounds(fam: ArnoldFamily, q_max: int) -> Interval:
    """Lower bound of the total measure of the phase-locking intervals p/q, q <= q_max (alpha mod 1)."""
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    total = Interval(0.0)
    for q in range(1, q_max + 1):
        for p in range(q):
            if math.gcd(p, q) == 1:
                total = total + tongue_width_lb(fam, p, q)
    return total.lower()
