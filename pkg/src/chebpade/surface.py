"""The two-sheeted elliptic surface over the Chebotarëv continuum.

Points are :class:`SheetPoint` objects.  Sheet 1 carries the branch of
w = sqrt(prod(z - a_j)) with w/z^2 -> 1; sheet 2 carries -w.  All path
integrals start at a base branch point (a1 unless stated otherwise) and
run through the cut plane of one sheet, so a sheet-2 value is the
sheet-1 integral with w negated.  The resulting functions are continuous
across the arc ending at the base point and jump across the other two.

Abelian integrals implemented here:

* Ω1, the first-kind integral with period 1 on the a-cycle around Δ2;
* log φ, the Green integral of (t - a0) dt / w;
* Ω0(a; .), the third-kind integral with poles a (residue 1) and ∞^(1)
  (residue -1) and zero a-period.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .chebotarev import ChebotarevData, with_capacity
from .errors import (
    AmbiguousTraceError,
    BranchPointError,
    InversionError,
    PoleError,
)
from .geometry import Star, gauss_legendre
from .mpnum import PrecisionCtx

INF = "inf"


@dataclass(frozen=True)
class SheetPoint:
    """A point of the surface: projection ``z`` (a number or ``INF``) and sheet 1 or 2."""

    z: object
    sheet: int = 1

    def __post_init__(self):
        if self.sheet not in (1, 2):
            raise ValueError("sheet must be 1 or 2")

    @property
    def is_inf(self) -> bool:
        return isinstance(self.z, str)

    @property
    def sigma(self) -> int:
        return 1 if self.sheet == 1 else -1

    def conj(self) -> "SheetPoint":
        return SheetPoint(self.z, 3 - self.sheet)

    def __repr__(self):
        z = "∞" if self.is_inf else complex(self.z)
        return f"SheetPoint({z}, sheet={self.sheet})"


INF1 = SheetPoint(INF, 1)
INF2 = SheetPoint(INF, 2)


@dataclass(frozen=True)
class Periods:
    """Arc integrals and the constants derived from them (surface labels 1..3)."""

    beta: tuple
    beta1: tuple
    tau_ratio: object
    omega: tuple
    xi_a1: object
    capacity: object

    def to_json(self) -> dict:
        def c(x):
            x = complex(x)
            return [x.real, x.imag]

        return {
            "beta": [c(b) for b in self.beta],
            "beta1": [c(b) for b in self.beta1],
            "tau_ratio": c(self.tau_ratio),
            "omega": [c(o) for o in self.omega],
            "xi_a1": c(self.xi_a1),
            "capacity": float(self.capacity),
        }


def write_periods_json(periods: Periods, path) -> None:
    with open(path, "w") as fh:
        json.dump(periods.to_json(), fh, indent=2)


# ---------------------------------------------------------------- lattice

def lattice_coords(v, tau, centered: bool = False):
    """Real coordinates (x, y) with v = x + y·tau, reduced into [0,1) or [-1/2,1/2)."""
    y = v.imag / tau.imag
    x = v.real - y * tau.real
    if centered:
        return x - math.floor(float(x) + 0.5), y - math.floor(float(y) + 0.5)
    return _frac(x), _frac(y)


def _frac(x):
    r = x - math.floor(float(x))
    # tiny negatives round up to exactly 1
    return r - 1 if r >= 1 else r


def lattice_reduce(v, periods: Periods):
    """Representative of v in the parallelogram spanned by 1 and β3/β2."""
    x, y = lattice_coords(v, periods.tau_ratio)
    return x + y * periods.tau_ratio


def lattice_distance(v, tau) -> float:
    """|v| measured modulo the lattice Z + tau Z."""
    x, y = lattice_coords(v, tau, centered=True)
    best = float("inf")
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            best = min(best, abs(complex((x + dx) + (y + dy) * tau)))
    return best


def a_index(kappa: int) -> int:
    """Label of the a-cycle paired with the b-cycle L_kappa (3 -> 2, 1 -> 3, 2 -> 1)."""
    if kappa not in (1, 2, 3):
        raise ValueError("kappa must be 1, 2 or 3")
    return {3: 2, 1: 3, 2: 1}[kappa]


def _centered(v, tau):
    """The lattice translate of v closest to 0."""
    x, y = lattice_coords(v, tau, centered=True)
    best = None
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            cand = (x + dx) + (y + dy) * tau
            if best is None or abs(cand) < abs(best):
                best = cand
    return best


# ---------------------------------------------------------------- the surface

class Surface:
    """Evaluation engine bound to one :class:`ChebotarevData` (with arcs)."""

    def __init__(self, data: ChebotarevData, ctx: PrecisionCtx = None, base: int = 1):
        if data.arcs is None:
            raise ValueError("arcs must be traced before building the surface")
        if ctx is not None and ctx.digits > data.ctx.digits:
            raise ValueError("surface precision cannot exceed the continuum's precision")
        self.data = data
        self.ctx = ctx or data.ctx
        self.mp = self.ctx.mp
        # every path starts at the branch point a_base; base 1 gives the standard normalization
        self.base = base
        self.star = Star(data.anchors, data.a0, self.ctx, data.arcs, base=base)
        self._periods = None
        self._ints = {}
        self._c = {}
        self._seeds = None
        self._low = None

    # ---- points

    def point(self, z, sheet: int = 1) -> SheetPoint:
        """A SheetPoint with branch points canonicalized to sheet 1."""
        if isinstance(z, str):
            return SheetPoint(INF, sheet)
        z = self.mp.mpc(z)
        if any(z == a for a in self.star.a):
            return SheetPoint(z, 1)
        return SheetPoint(z, sheet)

    def branch_index(self, pt: SheetPoint) -> Optional[int]:
        if pt.is_inf:
            return None
        z = self.mp.mpc(pt.z)
        for j, a in enumerate(self.star.a):
            if z == a:
                return j
        return None

    def conj(self, pt: SheetPoint) -> SheetPoint:
        if self.branch_index(pt) is not None:
            return pt
        return pt.conj()

    # ---- w

    def w(self, pt: SheetPoint):
        if pt.is_inf:
            raise PoleError("w has a double pole at infinity")
        if self.branch_index(pt) is not None:
            return self.mp.mpc(0)
        if self.star.dist_to_delta(complex(pt.z)) <= 1e-14 * self.star.diam:
            raise AmbiguousTraceError(f"{complex(pt.z)} lies on the cut; use trace_eval")
        return pt.sigma * self.star.w1(self.mp.mpc(pt.z))

    def arc_point(self, k: int, t):
        """Point on arc k at arclength fraction t (cubic Hermite in the stored tangents)."""
        arc = self.data.arcs[k - 1]
        s = arc.chord_param
        z = arc.samples
        tg = arc.tangents
        t = float(t)
        i = int(np.clip(np.searchsorted(s, t) - 1, 0, len(s) - 2))
        h = s[i + 1] - s[i]
        L = float(np.sum(np.abs(np.diff(z))))
        u = (t - s[i]) / h
        m0, m1 = tg[i] * h * L, tg[i + 1] * h * L
        h00 = 2 * u ** 3 - 3 * u ** 2 + 1
        h10 = u ** 3 - 2 * u ** 2 + u
        h01 = -2 * u ** 3 + 3 * u ** 2
        h11 = u ** 3 - u ** 2
        return complex(h00 * z[i] + h10 * m0 + h01 * z[i + 1] + h11 * m1), complex(tg[i] * (1 - u) + tg[i + 1] * u)

    def trace(self, k: int, t, side: str = "+"):
        """One-sided limit of sheet-1 w on arc k at arclength fraction t; '+' is the left side."""
        if not (0 < float(t) < 1):
            raise BranchPointError("trace requested at an arc endpoint")
        if side not in ("+", "-"):
            raise ValueError("side must be '+' or '-'")
        mp = self.mp
        z, _ = self.arc_point(k, t)
        st = self.star
        q = (z - st.ad[0]) / (st.ad[k] - st.ad[0])
        if q.imag == 0:
            wp = st.upper_trace_on_chord(k, mp.mpf(q.real))
        else:
            ws = st.w_star(mp.mpc(z))
            # left of the arc lies inside lens k exactly when the arc is right of its chord
            wp = ws if q.imag > 0 else -ws
        return wp if side == "+" else -wp

    # ---- periods

    @property
    def periods(self) -> Periods:
        if self._periods is None:
            self._periods = self._compute_periods()
        return self._periods

    def _compute_periods(self) -> Periods:
        mp = self.mp
        st = self.star
        a0 = st.a[0]
        beta, beta1, omega = [], [], []
        for k in (1, 2, 3):
            ts, vs = st.chord_rule(k)
            b = sum(vs) / (mp.pi * 1j)
            b1 = sum(t * v for t, v in zip(ts, vs)) / (mp.pi * 1j)
            g = -sum((t - a0) * v for t, v in zip(ts, vs)) / (mp.pi * 1j)
            beta.append(b)
            beta1.append(b1)
            omega.append(2j * mp.pi * g)
        data = self.data
        if data.capacity is None:
            data = with_capacity(data)
        return Periods(tuple(beta), tuple(beta1), beta[2] / beta[1], tuple(omega), mp.mpc(data.xi), mp.mpf(data.capacity))

    # ---- raw path integrals

    def _path(self, z, poles=()):
        """(Iw, Itw, [Ip], W, [Λ]) along the sheet-1 route a_base -> z."""
        key = (z, tuple(poles))
        hit = self._ints.get(key)
        if hit is None:
            if isinstance(z, str):
                vec, logs = self.star.integrals_inf(poles)
                hit = (vec[0], vec[1], vec[2:], None, logs)
            elif z == self.star.a[self.base]:
                hit = (self.mp.mpc(0), self.mp.mpc(0), [self.mp.mpc(0)] * len(poles), self.mp.mpc(0),
                       [None] * len(poles))
            else:
                vec, W, logs = self.star.integrals(z, poles)
                hit = (vec[0], vec[1], vec[2:], W, logs)
            self._ints[key] = hit
        return hit

    def _z(self, pt: SheetPoint):
        return INF if pt.is_inf else self.mp.mpc(pt.z)

    # ---- first kind

    def abel(self, pt: SheetPoint, kappa: int = 3):
        """Ω1(pt) along a path in the cut surface from the base point.

        With kappa != 3 the differential is normalized on L_{a_index(kappa)}
        instead of L_2.
        """
        Iw = self._path(self._z(pt))[0]
        b = self.periods.beta[a_index(kappa) - 1]
        return pt.sigma * Iw / (2j * self.mp.pi * b)

    # ---- Green map

    def log_green(self, pt: SheetPoint):
        """∫_{a_base}^{pt} (t - a0) dt / w; at ∞ the log z divergence is removed."""
        Iw, Itw = self._path(self._z(pt))[:2]
        return pt.sigma * (Itw - self.star.a[0] * Iw)

    def green(self, pt: SheetPoint):
        if pt.is_inf:
            raise PoleError("φ has a pole at ∞^(1) and a zero at ∞^(2)")
        return self.mp.exp(self.log_green(pt))

    # ---- third kind

    def c_const(self, a: SheetPoint, kappa: int = 3):
        """c(a) making the L_{a_index(kappa)} period of (r(a;.) + c(a)) dz/w vanish."""
        key = (self._z(a), a.sheet, kappa)
        if key in self._c:
            return self._c[key]
        mp = self.mp
        P = self.periods
        ia = a_index(kappa)
        b2, b12 = P.beta[ia - 1], P.beta1[ia - 1]
        if a.is_inf:
            if a.sheet == 1:
                raise PoleError("the differential with a = ∞^(1) is identically zero")
            out = -b12 / b2
        else:
            av = mp.mpc(a.z)
            wa = self.w(a)
            J2 = mp.mpc(0)
            if wa != 0:
                J2 = self._arc_cauchy(ia, av)
            A = self.star.A
            out = -(wa * J2 + mp.pi * 1j * b12 + (A - av) * mp.pi * 1j * b2) / (2j * mp.pi * b2)
        self._c[key] = out
        return out

    def _arc_cauchy(self, k: int, a):
        """∫_{Δk} dt / ((t - a) w+(t)), with the lens residue when a sits between arc and chord."""
        mp = self.mp
        st = self.star
        ts, vs = st.chord_rule(k, extra=(a,))
        val = sum(v / (t - a) for t, v in zip(ts, vs))
        if st.in_lens(complex(a), k):
            val -= 2j * mp.pi / st.w_star(a)
        return val

    def a_period(self, a: SheetPoint, k: int, kappa: int = 3):
        """Period of dΩ0(a, ∞^(1); .) over the cycle L_k (twice the arc integral)."""
        mp = self.mp
        P = self.periods
        c = self.c_const(a, kappa)
        bk, b1k = P.beta[k - 1], P.beta1[k - 1]
        if a.is_inf:
            return 2j * mp.pi * (b1k + c * bk)
        av = mp.mpc(a.z)
        wa = self.w(a)
        Jk = self._arc_cauchy(k, av) if wa != 0 else 0
        return wa * Jk + mp.pi * 1j * b1k + (self.star.A - av) * mp.pi * 1j * bk + 2j * mp.pi * c * bk

    def _prim(self, a: SheetPoint, pt: SheetPoint, kappa: int = 3):
        """Primitive of dΩ0(a, ∞^(1); .) along the route, regularized at ∞."""
        mp = self.mp
        z = self._z(pt)
        c = self.c_const(a, kappa)
        s = pt.sigma
        if a.is_inf:
            Iw, Itw = self._path(z)[:2]
            return s * (Itw + c * Iw)
        av = mp.mpc(a.z)
        if z == av:
            raise PoleError("third-kind integral evaluated at its pole")
        wa = self.w(a)
        Iw, Itw, Ip, _, logs = self._path(z, (av,))
        ab = self.star.a[self.base]
        if not isinstance(z, str) and z == ab:
            if av == ab:
                raise PoleError("the base point is both the pole and the evaluation point")
            lg = mp.log(ab - av)
        else:
            lg = logs[0]
        return lg / 2 + s * (wa * Ip[0] + (self.star.A - av + 2 * c) * Iw + Itw) / 2

    def third_kind(self, a: SheetPoint, pt: SheetPoint, kappa: int = 3):
        """Ω0(a; pt) = ∫_{a_base}^{pt} dΩ0(a, ∞^(1); .).  For a = a_base the lower limit is H^(1)."""
        if a.is_inf and a.sheet == 1:
            return self.mp.mpc(0)
        if pt.is_inf and pt.sheet == 1:
            raise PoleError("Ω0(a; .) has a logarithmic singularity at ∞^(1)")
        if not a.is_inf and not pt.is_inf and self.mp.mpc(a.z) == self.mp.mpc(pt.z) and a.sheet == pt.sheet:
            raise PoleError("Ω0(a; .) has a logarithmic singularity at a")
        val = self._prim(a, pt, kappa)
        ab = self.star.a[self.base]
        if not a.is_inf and self.mp.mpc(a.z) == ab:
            val -= self._prim(a, SheetPoint(self.mp.mpc(self.star.H), 1), kappa)
        elif not a.is_inf:
            val -= self.mp.log(ab - self.mp.mpc(a.z)) / 2
        return val

    def third_kind_between(self, a: SheetPoint, p: SheetPoint, q: SheetPoint, kappa: int = 3):
        """∫_p^q dΩ0(a, ∞^(1); .) with both endpoints joined through a_base (∞ endpoints regularized)."""
        return self._prim(a, q, kappa) - self._prim(a, p, kappa)

    # ---- Jacobi inversion

    def invert(self, target, tol: float = None) -> SheetPoint:
        """The unique ẑ with Ω1(ẑ) ≡ target modulo the lattice."""
        mp = self.mp
        P = self.periods
        tau = P.tau_ratio
        target = mp.mpc(target)
        tol = tol if tol is not None else self.ctx.tol
        seeds = self._seed_table()
        order = sorted(range(len(seeds)), key=lambda i: lattice_distance(seeds[i][1] - complex(target), complex(tau)))
        last = None
        for i in order[:8]:
            pt, val = seeds[i]
            try:
                res = self._newton_from(pt, val, target, tol)
            except (InversionError, PoleError, ZeroDivisionError) as exc:
                last = exc
                continue
            if res is not None:
                return res
        raise InversionError(f"Jacobi inversion failed from every seed (target {complex(target)})") from last

    def _seed_table(self):
        """Coarse forward map: (SheetPoint, Ω1 as complex) over both sheets, computed at low precision."""
        if self._seeds is not None:
            return self._seeds
        low = self._low_surface()
        st = low.star
        pts = []
        c, rT = st.c, st.r_T
        for rad in (0.25, 0.55, 0.9, 1.3, 2.2):
            n = 8 if rad < 0.5 else 16
            for j in range(n):
                z = c + rad * rT * complex(math.cos(2 * math.pi * (j + 0.5) / n), math.sin(2 * math.pi * (j + 0.5) / n))
                if st.dist_to_delta(z) < 0.03 * st.diam or np.min(np.abs(st.ad - z)) < 0.05 * st.diam:
                    continue
                pts.append(z)
        table = []
        for z in pts:
            v = complex(low.abel(SheetPoint(low.mp.mpc(z), 1)))
            table.append((SheetPoint(z, 1), v))
            table.append((SheetPoint(z, 2), -v))
        for j in range(4):
            z = st.ad[j]
            v = complex(low.abel(SheetPoint(low.star.a[j], 1)))
            table.append((SheetPoint(self.star.a[j], 1), v))
        vinf = complex(low.abel(INF1))
        table.append((INF1, vinf))
        table.append((INF2, -vinf))
        self._seeds = table
        return table

    def _low_surface(self) -> "Surface":
        if self._low is None:
            if self.ctx.digits <= 30:
                self._low = self
            else:
                low = Surface.__new__(Surface)
                low.__init__(self.data, PrecisionCtx(30), self.base)
                self._low = low
        return self._low

    def _newton_from(self, pt: SheetPoint, val, target, tol):
        low = self._low_surface()
        state = _Chart.from_point(low, pt)
        omega = low.abel(pt if pt.is_inf else SheetPoint(low.mp.mpc(pt.z), pt.sheet))
        state, omega = state.newton(omega, low.mp.mpc(target), 1e-22)
        if self.ctx.digits <= 30:
            return state.to_point(self)
        approx = state.to_point(self)
        if approx.is_inf or self.branch_index(approx) is not None:
            return approx
        hi = _Chart.from_point(self, approx, W=self.w(approx))
        omega = self.abel(approx)
        hi, _ = hi.newton(omega, target, tol)
        return hi.to_point(self)


class _Chart:
    """Local coordinate for Newton on the Abel map: z, u (z = a_k + u^2) or ζ (z = c + 1/ζ)."""

    def __init__(self, surf: Surface, kind: str, x, root, k: int = None):
        self.s = surf
        self.kind = kind
        self.x = x
        self.root = root
        self.k = k

    # radicand and differential factor in each chart: dz/w = factor dx / sqrt(radicand)
    def _rad(self, x):
        a = self.s.star.a
        if self.kind == "z":
            return self.s.star.P(x)
        if self.kind == "u":
            ak = a[self.k]
            out = 1
            for j in range(4):
                if j != self.k:
                    out *= ak + x * x - a[j]
            return out
        c = self.s.mp.mpc(self.s.star.c)
        out = 1
        for aj in a:
            out *= 1 - (aj - c) * x
        return out

    def _factor(self):
        return {"z": 1, "u": 2, "zeta": -1}[self.kind]

    def z(self):
        mp = self.s.mp
        if self.kind == "z":
            return self.x
        if self.kind == "u":
            return self.s.star.a[self.k] + self.x * self.x
        return mp.mpc(self.s.star.c) + 1 / self.x if self.x != 0 else INF

    def W(self):
        if self.kind == "z":
            return self.root
        if self.kind == "u":
            return self.x * self.root
        return self.root / (self.x * self.x)

    @classmethod
    def from_point(cls, surf: Surface, pt: SheetPoint, W=None):
        mp = surf.mp
        if pt.is_inf:
            ch = cls(surf, "zeta", mp.mpc(0), mp.mpc(pt.sigma))
            return ch
        j = surf.branch_index(SheetPoint(mp.mpc(pt.z), 1))
        if j is not None:
            ch = cls(surf, "u", mp.mpc(0), None, j)
            ch.root = mp.sqrt(ch._rad(mp.mpc(0)))
            return ch
        z = mp.mpc(pt.z)
        if W is None:
            W = surf.w(SheetPoint(z, pt.sheet))
        ch = cls(surf, "z", z, W)
        return ch.rechart()

    def rechart(self) -> "_Chart":
        """Switch to the chart best suited to the current position."""
        mp = self.s.mp
        st = self.s.star
        z = self.z()
        if isinstance(z, str):
            return self
        zd = complex(z)
        far = abs(zd - st.c) > 2.5 * st.r_T
        dists = np.abs(st.ad - zd)
        j = int(np.argmin(dists))
        R = 0.3 * min(abs(st.ad[j] - st.ad[i]) for i in range(4) if i != j)
        if far:
            kind, k = "zeta", None
        elif dists[j] < R:
            kind, k = "u", j
        else:
            kind, k = "z", None
        if kind == self.kind and k == self.k:
            return self
        W = self.W()
        if kind == "z":
            return _Chart(self.s, "z", z, W)
        if kind == "u":
            u = mp.sqrt(z - st.a[j])
            ch = _Chart(self.s, "u", u, None, j)
            g = mp.sqrt(ch._rad(u))
            ch.root = g if abs(u * g - W) <= abs(u * g + W) else -g
            return ch
        zeta = 1 / (z - mp.mpc(st.c))
        ch = _Chart(self.s, "zeta", zeta, None)
        V = mp.sqrt(ch._rad(zeta))
        ch.root = V if abs(V - W * zeta * zeta) <= abs(V + W * zeta * zeta) else -V
        return ch

    def _cap(self) -> float:
        st = self.s.star
        if self.kind == "z":
            return 0.45 * float(np.min(np.abs(st.ad - complex(self.x))))
        if self.kind == "u":
            R = min(abs(st.ad[self.k] - st.ad[i]) for i in range(4) if i != self.k)
            return 0.3 * math.sqrt(R)
        return 0.3 / st.r_T

    def step(self, dx):
        """Move by dx in the chart; returns (new chart, ∫ dz/w along the move)."""
        mp = self.s.mp
        gx, gw = gauss_legendre(self.s.star.m, self.s.ctx)
        f = self._factor()
        root = self.root
        acc = mp.mpc(0)
        for xn, wt in zip(gx, gw):
            x = self.x + dx * xn
            r = mp.sqrt(self._rad(x))
            root = r if abs(r - root) <= abs(r + root) else -r
            acc += wt * f / root
        x1 = self.x + dx
        r = mp.sqrt(self._rad(x1))
        root = r if abs(r - root) <= abs(r + root) else -r
        return _Chart(self.s, self.kind, x1, root, self.k), acc * dx

    def newton(self, omega, target, tol, max_iter: int = 200):
        mp = self.s.mp
        b2 = self.s.periods.beta[1]
        scale = 2j * mp.pi * b2
        tau = self.s.periods.tau_ratio
        ch = self
        for _ in range(max_iter):
            ch = ch.rechart()
            delta = _centered(target - omega, tau)
            if abs(delta) < tol:
                return ch, omega
            deriv = ch._factor() / (ch.root * scale)
            dx = delta / deriv
            cap = ch._cap()
            if abs(dx) > cap:
                dx *= cap / abs(dx)
            for _half in range(30):
                new, d_int = ch.step(dx)
                new_omega = omega + d_int / scale
                if abs(_centered(target - new_omega, tau)) < abs(delta):
                    break
                dx /= 2
            else:
                raise InversionError("Newton step failed to reduce the residual")
            ch, omega = new, new_omega
        raise InversionError("Newton did not converge")

    def to_point(self, surf: Surface) -> SheetPoint:
        """Identify the chart position as a SheetPoint of ``surf`` (snapping to branch points and ∞)."""
        mp = surf.mp
        st = surf.star
        if self.kind == "zeta" and abs(self.x) * st.r_T < 1e-20:
            return SheetPoint(INF, 1 if mp.re(self.root) > 0 else 2)
        if self.kind == "u" and abs(self.x) < 1e-20 * math.sqrt(st.diam):
            return SheetPoint(surf.star.a[self.k], 1)
        z = mp.mpc(self.z())
        W = mp.mpc(self.W())
        zd = complex(z)
        if st.dist_to_delta(zd) <= 1e-12 * st.diam:
            # on the cut: push into the side whose sheet-1 value continues W
            near = st.nearest_on_delta(zd)
            nrm = (zd - near) / abs(zd - near) if abs(zd - near) > 0 else 1j
            z = z + mp.mpc(nrm * 1e-8 * st.diam)
        w1 = st.w1(z)
        sheet = 1 if abs(w1 - W) <= abs(w1 + W) else 2
        return SheetPoint(z, sheet)


# ---------------------------------------------------------------- module API

_SURFACES: dict = {}


def surface_for(data: ChebotarevData, ctx: PrecisionCtx = None, base: int = 1) -> Surface:
    key = (id(data), (ctx or data.ctx).digits, base)
    hit = _SURFACES.get(key)
    if hit is None or hit[0] is not data:
        hit = (data, Surface(data, ctx, base))
        _SURFACES[key] = hit
    return hit[1]


def w_eval(pt: SheetPoint, data: ChebotarevData):
    return surface_for(data).w(pt)


def trace_eval(arc_index: int, t, side: str, data: ChebotarevData):
    return surface_for(data).trace(arc_index, t, side)


def compute_periods(data: ChebotarevData, ctx: PrecisionCtx = None) -> Periods:
    return surface_for(data, ctx).periods


def green_map(pt: SheetPoint, data: ChebotarevData, ctx: PrecisionCtx = None):
    return surface_for(data, ctx).green(pt)


def abel_map(pt: SheetPoint, data: ChebotarevData, periods: Periods = None, ctx: PrecisionCtx = None):
    return surface_for(data, ctx).abel(pt)


def third_kind_integral(a: SheetPoint, pt: SheetPoint, data: ChebotarevData, periods: Periods = None,
                        ctx: PrecisionCtx = None):
    return surface_for(data, ctx).third_kind(a, pt)


def jacobi_invert(target, periods: Periods, data: ChebotarevData, ctx: PrecisionCtx = None) -> SheetPoint:
    return surface_for(data, ctx).invert(target)


def write_abel_grid_csv(data: ChebotarevData, path, n: int = 24, radius: float = 1.5) -> None:
    """Ω1 on a polar grid (both sheets) for plotting."""
    surf = surface_for(data)
    st = surf.star
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["sheet", "re_z", "im_z", "re_abel", "im_abel"])
        for rad in np.linspace(0.2, radius, 6):
            for j in range(n):
                z = st.c + rad * st.r_T * complex(math.cos(2 * math.pi * j / n), math.sin(2 * math.pi * j / n))
                if st.dist_to_delta(z) < 1e-6 * st.diam:
                    continue
                v = complex(surf.abel(SheetPoint(surf.mp.mpc(z), 1)))
                wr.writerow([1, z.real, z.imag, v.real, v.imag])
                wr.writerow([2, z.real, z.imag, -v.real, -v.imag])
