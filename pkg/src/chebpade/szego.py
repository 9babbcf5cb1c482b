"""Densities on Δ, their Szegő functions and the Szegő-type functions S_n.

A :class:`Density` describes h; :meth:`Density.bind` attaches it to a
continuum and computes the moments m0, m1 and the constants derived from
them.  Arc integrals are taken over the chords [a0, a_k] with the residue
picked up whenever the pole sits inside the lens between arc and chord,
so the log branch must be analytic on the lenses as well as on Δ.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .chebotarev import ChebotarevData
from .errors import (
    AmbiguousTraceError,
    ConsistencyError,
    GeometryError,
    PoleError,
)
from .geometry import _seg_intersections
from .mpnum import PrecisionCtx
from .surface import (
    INF1,
    INF2,
    Periods,
    SheetPoint,
    Surface,
    lattice_distance,
    surface_for,
)

KINDS = ("unit", "recip_poly", "analytic")

# named analytic densities: log h as a function of t (entire, so any branch works)
BUILTINS: dict = {
    "exp": lambda t, mp: t,
    "expsq": lambda t, mp: t * t,
    "gauss": lambda t, mp: -t * t / 2,
}


@dataclass(frozen=True)
class Density:
    """The weight h: ``unit`` (h = 1), ``recip_poly`` (h = 1/p, coefficients c0, c1, ...) or a named builtin."""

    kind: str = "unit"
    poly_coeffs: tuple = ()
    name: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown density kind {self.kind!r}")
        if self.kind == "recip_poly":
            if not self.poly_coeffs or all(c == 0 for c in self.poly_coeffs):
                raise ValueError("recip_poly needs a nonzero coefficient list")
        if self.kind == "analytic" and self.name not in BUILTINS:
            raise ValueError(f"unknown builtin density {self.name!r}; choose from {sorted(BUILTINS)}")

    @classmethod
    def parse(cls, text: str) -> "Density":
        """Parse ``one``, ``recip-poly:c0,c1,...`` or ``analytic:<name>``."""
        text = text.strip()
        if text in ("one", "unit", "1"):
            return cls("unit")
        head, _, rest = text.partition(":")
        if head in ("recip-poly", "recip_poly"):
            coeffs = tuple(complex(c.strip().replace("i", "j")) for c in rest.split(",") if c.strip())
            while len(coeffs) > 1 and coeffs[-1] == 0:
                coeffs = coeffs[:-1]
            return cls("recip_poly", coeffs)
        if head == "analytic":
            return cls("analytic", name=rest.strip())
        raise ValueError(f"cannot parse density {text!r}")

    @property
    def degree(self) -> int:
        """deg p for h = 1/p, else 0."""
        return len(self.poly_coeffs) - 1 if self.kind == "recip_poly" else 0

    def bind(self, data: ChebotarevData, kappa: int = 3, ctx: PrecisionCtx = None,
             log_shift: complex = 0) -> "BoundDensity":
        return BoundDensity(self, surface_for(data, ctx), kappa, log_shift)


class BoundDensity:
    """A density attached to one continuum: log branch, moments and constants.

    The log branch is analytic on a neighbourhood of Δ and of the three
    lenses.  For h = 1/p it is -log(lead) - Σ log(t - r) where each root's
    logarithm is cut along a ray from r that avoids every arc and chord.
    """

    def __init__(self, density: Density, surf: Surface, kappa: int = 3, log_shift: complex = 0):
        if kappa not in (1, 2, 3):
            raise ValueError("kappa must be 1, 2 or 3")
        self.density = density
        self.kind = density.kind
        self.poly_coeffs = density.poly_coeffs
        self.surf = surf
        self.kappa = kappa
        self.mp = surf.mp
        mp = self.mp
        self.log_shift = mp.mpc(log_shift)
        self.roots = []
        self.cuts = []
        if self.kind == "recip_poly":
            self._setup_roots()
        self._check_samples()
        self._node_vals = {}
        self._log_szego = {}
        st = surf.star
        m = [mp.mpc(0), mp.mpc(0)]
        for k in (1, 2, 3):
            ts, vs, _ = st.chord_nodes(k)
            th = self._nodes_theta(k)
            m[0] += sum(x * v for x, v in zip(th, vs))
            m[1] += sum(t * x * v for t, x, v in zip(ts, th, vs))
        self.m0 = m[0] / (mp.pi * 1j)
        self.m1 = m[1] / (mp.pi * 1j)
        P = surf.periods
        bk, b1k = P.beta[kappa - 1], P.beta1[kappa - 1]
        self.gamma = -self.m0 / (2j * mp.pi * bk)
        self.logGh = st.a[0] * self.m0 - self.m1
        self.Gh = mp.exp(self.logGh)
        self.logGhk = -self.m1 + b1k / bk * self.m0
        self.Ghk = mp.exp(self.logGhk)
        self.Ghk_tilde = self.Ghk * mp.exp(self.m0 / bk)

    # ---- h and its log

    def _setup_roots(self):
        mp = self.mp
        st = self.surf.star
        coeffs = [mp.mpc(c) for c in self.poly_coeffs]
        self.lead = coeffs[-1]
        if len(coeffs) == 1:
            return
        from .pade import poly_roots

        self.roots = poly_roots(coeffs, self.surf.ctx)
        chords = [np.array([st.ad[0], st.ad[k]]) for k in (1, 2, 3)]
        R = 4 * (st.r_T + max(abs(complex(r) - st.c) for r in self.roots))
        for r in self.roots:
            rd = complex(r)
            if st.dist_to_delta(rd) <= 1e-10 * st.diam:
                raise PoleError(f"h = 1/p has a pole on Δ at {rd}")
            k = st.lens_index(rd)
            if k:
                raise GeometryError(f"root {rd} of p lies between arc {k} and its chord; the chord rules need h analytic there")
            base = rd - st.c
            phi0 = math.atan2(base.imag, base.real) if abs(base) > 0 else 0.0
            best = None
            for j in range(72):
                phi = phi0 + math.pi * ((j + 1) // 2) / 36 * (1 if j % 2 else -1)
                d = cmath.exp(1j * phi)
                end = rd + R * d
                if any(_seg_intersections(rd, end, poly) for poly in st.polys):
                    continue
                if any(_seg_intersections(rd, end, ch) for ch in chords):
                    continue
                best = d
                break
            if best is None:
                raise GeometryError(f"no branch cut from root {rd} avoids Δ")
            self.cuts.append(mp.mpc(best))

    def h(self, t):
        mp = self.mp
        t = mp.mpc(t)
        if self.kind == "unit":
            return mp.mpc(1)
        if self.kind == "recip_poly":
            return 1 / mp.polyval(list(reversed([mp.mpc(c) for c in self.poly_coeffs])), t)
        return mp.exp(BUILTINS[self.density.name](t, mp))

    def log_branch(self, t):
        """θ = log h on Δ, the lenses and their neighbourhood."""
        mp = self.mp
        t = mp.mpc(t)
        if self.kind == "unit":
            out = mp.mpc(0)
        elif self.kind == "analytic":
            out = mp.mpc(BUILTINS[self.density.name](t, mp))
        else:
            out = -mp.log(self.lead)
            for r, d in zip(self.roots, self.cuts):
                out -= mp.log((t - r) / (-d)) + mp.log(-d)
        return out + self.log_shift

    def evaluator(self, t):
        return self.h(t)

    def _check_samples(self):
        for arc in self.surf.data.arcs:
            prev = None
            for z in arc.samples[1:-1:4]:
                hv = self.h(z)
                if abs(hv) <= 1e-10:
                    raise PoleError(f"h vanishes on Δ near {complex(z)}")
                th = self.log_branch(z)
                if abs(self.mp.exp(th) / hv - 1) > 1e-8:
                    raise ConsistencyError("exp(log_branch) does not reproduce h")
                if prev is not None and abs(float(self.mp.im(th - prev))) > math.pi / 4:
                    raise ConsistencyError("log branch jumps along an arc")
                prev = th

    def node_values(self, k, z=None, what: str = "theta"):
        """(ts, vs, ws, values) for arc k's rule (refined for a pole at z); θ or h values cached per rule."""
        st = self.surf.star
        ts, vs, ws = st.chord_nodes(k) if z is None else st.chord_nodes_at(k, z)
        key = (id(ts), what)
        hit = self._node_vals.get(key)
        if hit is None or hit[0] is not ts:
            if len(self._node_vals) > 4096:
                self._node_vals.clear()
            f = self.log_branch if what == "theta" else self.h
            hit = (ts, [f(t) for t in ts])
            self._node_vals[key] = hit
        return ts, vs, ws, hit[1]

    def _nodes_theta(self, k):
        return self.node_values(k)[3]


# ---------------------------------------------------------------- Cauchy transforms

def _side(st, z, k) -> int:
    """+1 when z lies right of the chord a0 -> a_k, else -1."""
    q = (complex(z) - st.ad[0]) / (st.ad[k] - st.ad[0])
    return 1 if q.imag < 0 else -1


def _check_off_delta(st, z):
    if st.dist_to_delta(complex(z)) <= 1e-14 * st.diam:
        raise AmbiguousTraceError(f"{complex(z)} lies on Δ; evaluate at a nearby point on the chosen side")


def _arc_sums(bd: BoundDensity, z, theta: Callable = None):
    """Per arc: (∫ θ dt/(t - z), ∫ θ dt/((t - z) w+), ∫ dt/((t - z) w+)) with lens residues."""
    mp = bd.mp
    st = bd.surf.star
    zd = complex(z)
    out = []
    ws_z = None
    for k in (1, 2, 3):
        if theta is None:
            ts, vs, ws, th = bd.node_values(k, z)
        else:
            ts, vs, ws = st.chord_nodes_at(k, z)
            th = [theta(t) for t in ts]
        c0 = mp.mpc(0)
        c1 = mp.mpc(0)
        c2 = mp.mpc(0)
        for t, v, wv, x in zip(ts, vs, ws, th):
            q = v / (t - z)
            c0 += x * wv * q
            c1 += x * q
            c2 += q
        if st.in_lens(zd, k):
            f = theta or bd.log_branch
            tz = f(z)
            if ws_z is None:
                ws_z = st.w_star(z)
            c0 += 2j * mp.pi * _side(st, z, k) * tz
            c1 -= 2j * mp.pi * tz / ws_z
            c2 -= 2j * mp.pi / ws_z
        out.append((c0, c1, c2))
    return out


def cauchy_transforms(theta, z, data: ChebotarevData = None, ctx: PrecisionCtx = None, density: BoundDensity = None):
    """(C_Δ(θ; z), R_Δ(θ; z)) for a function θ analytic on Δ and the lenses."""
    bd = density or Density().bind(data, ctx=ctx)
    mp = bd.mp
    z = mp.mpc(z)
    st = bd.surf.star
    _check_off_delta(st, z)
    sums = _arc_sums(bd, z, theta)
    C = sum(s[0] for s in sums) / (2j * mp.pi)
    R = st.w1(z) * sum(s[1] for s in sums) / (2j * mp.pi)
    return C, R


def log_szego(bd: BoundDensity, z):
    """log S_{h,κ}(z) for z ∈ D off Δ (z = INF gives 0)."""
    mp = bd.mp
    if isinstance(z, str):
        return mp.mpc(0)
    if bd.kind == "unit" and bd.log_shift == 0:
        return mp.mpc(0)
    z = mp.mpc(z)
    hit = bd._log_szego.get(z)
    if hit is not None:
        return hit
    st = bd.surf.star
    _check_off_delta(st, z)
    sums = _arc_sums(bd, z)
    R = sum(s[1] for s in sums)
    Ck = sums[bd.kappa - 1][2]
    bk = bd.surf.periods.beta[bd.kappa - 1]
    out = st.w1(z) * (R - bd.m0 / bk * Ck) / (2j * mp.pi) - bd.logGhk / 2
    if len(bd._log_szego) > 4096:
        bd._log_szego.clear()
    bd._log_szego[z] = out
    return out


def szego_function(h, kappa: int, z, data: ChebotarevData, periods: Periods = None, ctx: PrecisionCtx = None):
    """S_{h,κ}(z); ``h`` may be a Density or an already bound density."""
    bd = h if isinstance(h, BoundDensity) and h.kappa == kappa else _as_bound(h, data, kappa, ctx)
    return bd.mp.exp(log_szego(bd, z))


def _as_bound(h, data, kappa, ctx) -> BoundDensity:
    if isinstance(h, BoundDensity):
        return BoundDensity(h.density, h.surf, kappa, h.log_shift)
    return h.bind(data, kappa, ctx)


# ---------------------------------------------------------------- ẑ_n

@dataclass(frozen=True)
class ZnSolution:
    n: int
    zn: SheetPoint
    lambda_n: object
    jn: int
    ln: int
    residual: float
    gamma: object
    v: object


def _special_point(surf: Surface, target) -> Optional[SheetPoint]:
    """∞^(1), ∞^(2) or a branch point when target hits its Abel value exactly (mod the lattice)."""
    tau = complex(surf.periods.tau_ratio)
    cands = [INF1, INF2] + [SheetPoint(a, 1) for a in surf.star.a]
    for pt in cands:
        if lattice_distance(complex(target - surf.abel(pt)), tau) < 1e-9:
            return pt
    return None


def solve_zn(n: int, h, data: ChebotarevData, periods: Periods = None, ctx: PrecisionCtx = None) -> ZnSolution:
    """ẑ_n from Ω1(ẑ) + (n-1)Ω1(∞^(2)) - nΩ1(∞^(1)) + γβ3/β2 ≡ 0 (standard cycles, γ = γ_3)."""
    if n < 1:
        raise ValueError("n must be positive")
    bd = _as_bound(h, data, 3, ctx) if not (isinstance(h, BoundDensity) and h.kappa == 3) else h
    surf = bd.surf
    mp = surf.mp
    P = surf.periods
    tau = P.tau_ratio
    gamma = bd.gamma
    o1, o2 = surf.abel(INF1), surf.abel(INF2)
    target = -(n - 1) * o2 + n * o1 - gamma * tau
    zn = _special_point(surf, target)
    if zn is None:
        zn = surf.invert(target)
    S = surf.abel(zn) + (n - 1) * o2 - n * o1 + gamma * tau
    y = mp.im(S) / mp.im(tau)
    j = int(mp.nint(y))
    l = int(mp.nint(mp.re(S) - j * mp.re(tau)))
    resid = float(abs(S - l - j * tau))
    om2 = P.omega[1] / (2j * mp.pi)
    om3 = P.omega[2] / (2j * mp.pi)
    lam = 2j * mp.pi * (n * om2 - j + gamma)
    v = n * om3 - (n * om2 + gamma) * tau
    return ZnSolution(n, zn, lam, j, l, resid, gamma, v)


def lambda_from_point(surf: Surface, zn: SheetPoint, gamma):
    """λ(ẑ) = -2πi (Im γ · conj(τ) + Im(Ω1(ẑ) - Ω1(∞^(2)))) / Im τ."""
    mp = surf.mp
    tau = surf.periods.tau_ratio
    d = surf.abel(zn) - surf.abel(INF2)
    return -2j * mp.pi * (mp.im(gamma) * mp.conj(tau) + mp.im(d)) / mp.im(tau)


# ---------------------------------------------------------------- S_n

@dataclass
class SzegoData:
    """S_n assembled for one n and κ; call :meth:`Sn` or the two sheet evaluators."""

    n: int
    kappa: int
    density: BoundDensity
    zn: SheetPoint
    jn: int
    ln: int
    j_kappa: int
    lambda_n: object
    k_n: int
    log_gamma_n: object
    xi_n: object = None
    surf_k: Surface = field(default=None, repr=False)
    _terms: list = field(default_factory=list, repr=False)

    @property
    def surf(self) -> Surface:
        return self.density.surf

    def _exponent(self, pt: SheetPoint):
        surf = self.surf_k
        bd = self.density
        mp = surf.mp
        out = mp.mpc(0)
        for a, coef in self._terms:
            out += coef * surf._prim(a, pt, self.kappa)
        out += 2j * mp.pi * (bd.gamma - self.j_kappa) * surf.abel(pt, self.kappa)
        return out

    def log_phi(self, pt: SheetPoint):
        return self._exponent(pt) + self.log_gamma_n

    def phi(self, pt: SheetPoint):
        return self.surf.mp.exp(self.log_phi(pt))

    def Shk(self, z):
        return self.surf.mp.exp(log_szego(self.density, z))

    def Sn(self, pt: SheetPoint):
        if pt.is_inf:
            raise PoleError("S_n is normalized, not evaluated, at ∞")
        mp = self.surf.mp
        ls = log_szego(self.density, pt.z)
        if pt.sheet == 1:
            return mp.exp(self.log_phi(pt) - ls)
        return mp.exp(self.log_phi(pt) + ls + self.density.logGhk)

    def Sn_sheet1(self, z):
        return self.Sn(SheetPoint(self.surf.mp.mpc(z), 1))

    def Sn_sheet2(self, z):
        return self.Sn(SheetPoint(self.surf.mp.mpc(z), 2))

    def product_rhs(self, z):
        """The right side of the S_n S_n* law without the unimodular factor."""
        surf = self.surf
        mp = surf.mp
        cp = surf.periods.capacity
        Gh = self.density.Gh
        zn = self.zn
        if zn.is_inf:
            return Gh * cp if zn.sheet == 2 else Gh / cp
        gz = abs(surf.green(SheetPoint(zn.z, 1)))
        dz = mp.mpc(z) - mp.mpc(zn.z)
        on_L = surf.star.dist_to_delta(complex(zn.z)) <= 1e-12 * surf.star.diam
        if zn.sheet == 2 and not on_L and surf.branch_index(zn) is None:
            return Gh * dz / gz
        return Gh * dz * gz

    def xi_at(self, z):
        """S_n S_n* / (cp^(2n-1) · right side) at z; unimodular when everything is consistent."""
        mp = self.surf.mp
        z = mp.mpc(z)
        cp = self.surf.periods.capacity
        val = self.Sn_sheet1(z) * self.Sn_sheet2(z) / cp ** (2 * self.n - 1)
        return val / self.product_rhs(z)


def route_base(kappa: int) -> int:
    """Branch point whose arc stays uncut for the given κ (3 -> a1, 1 -> a2, 2 -> a3)."""
    return kappa % 3 + 1


def _j_kappa(surf: Surface, terms, gamma, kappa: int) -> int:
    """The integer j making the L_κ period of the φ_n exponent lie in 2πiZ."""
    mp = surf.mp
    P = surf.periods
    from .surface import a_index

    tau_k = P.beta[kappa - 1] / P.beta[a_index(kappa) - 1]
    X = sum(coef * surf.a_period(a, kappa, kappa) for a, coef in terms) / (2j * mp.pi) + gamma * tau_k
    j = int(mp.nint(mp.im(X) / mp.im(tau_k)))
    frac = X - j * tau_k
    if abs(frac - mp.nint(mp.re(frac))) > 1e-8:
        raise ConsistencyError(f"ẑ_n does not satisfy the period condition (residual {complex(frac)})")
    return j


def build_Sn(n: int, h, kappa: int, data: ChebotarevData, periods: Periods = None,
             ctx: PrecisionCtx = None, solution: ZnSolution = None) -> SzegoData:
    """φ_n with divisor ẑ_n + (n-1)∞^(2) - n∞^(1), normalized at ∞^(1), divided by the Szegő function."""
    bd = _as_bound(h, data, kappa, ctx) if not (isinstance(h, BoundDensity) and h.kappa == kappa) else h
    surf = surface_for(data, bd.surf.ctx, base=route_base(kappa))
    mp = surf.mp
    sol = solution or solve_zn(n, bd if kappa == 3 else _as_bound(bd, data, 3, ctx), data)
    zn = sol.zn
    terms = []
    if zn == INF1 or (zn.is_inf and zn.sheet == 1):
        k_n = n - 1
        if n > 1:
            terms.append((INF2, n - 1))
    else:
        k_n = n
        if zn.is_inf:
            terms.append((INF2, n))
        else:
            terms.append((zn, 1))
            if n > 1:
                terms.append((INF2, n - 1))
    jk = _j_kappa(surf, terms, bd.gamma, kappa)
    sd = SzegoData(n, kappa, bd, zn, sol.jn, sol.ln, jk, sol.lambda_n, k_n, mp.mpc(0), surf_k=surf, _terms=terms)
    sd.log_gamma_n = -sd._exponent(INF1)
    st = surf.star
    zref = mp.mpc(st.c + 1.7 * st.r_T * cmath.exp(0.37j))
    if not zn.is_inf and abs(complex(zn.z) - complex(zref)) < 0.1 * st.diam:
        zref = mp.mpc(st.c + 1.7 * st.r_T * cmath.exp(2.1j))
    sd.xi_n = sd.xi_at(zref)
    return sd


def write_sn_csv(sd: SzegoData, path, points) -> None:
    """S_n on both sheets and S_{h,κ} at the given points."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["re_z", "im_z", "sheet", "re_value", "im_value", "kind"])
        for z in points:
            for sheet in (1, 2):
                v = complex(sd.Sn(SheetPoint(sd.surf.mp.mpc(z), sheet)))
                wr.writerow([complex(z).real, complex(z).imag, sheet, v.real, v.imag, "S_n"])
            v = complex(sd.Shk(z))
            wr.writerow([complex(z).real, complex(z).imag, 1, v.real, v.imag, "S_hk"])
