"""Cut geometry, branch bookkeeping and quadrature shared by the surface code.

Conventions
-----------
``w`` always means the sheet-1 branch of sqrt(prod(z - a_j)) with w/z^2 -> 1.
The helper ``w_star`` has straight cuts [a0, a_k]; it differs from ``w`` by a
sign inside the thin regions enclosed between each traced arc and its chord.

Integrals over an arc of g(t) dt / w_plus(t) equal the same integral over the
chord with the upper trace of ``w_star`` as long as g is analytic in between
(Cauchy's theorem).  This is how every arc integral is evaluated: along the
chord, with the substitution s = (1 - cos θ)/2 that removes both square-root
endpoint singularities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousTraceError, PathError
from .mpnum import PrecisionCtx

RHO_TARGET = 5.0


# ---------------------------------------------------------------- Gauss-Legendre

_GL_CACHE: dict = {}


def gauss_legendre(m: int, ctx: PrecisionCtx):
    """Nodes and weights on [0, 1] at the context precision (cached)."""
    key = (m, ctx.digits)
    hit = _GL_CACHE.get(key)
    if hit is not None:
        return hit
    mp = ctx.mp
    x0, _ = np.polynomial.legendre.leggauss(m)
    nodes, weights = [], []
    for guess in x0:
        x = mp.mpf(float(guess))
        tol = 16 * mp.eps
        done = False
        for _ in range(100):
            p0, p1 = mp.mpf(1), x
            for j in range(2, m + 1):
                p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
            dp = m * (x * p1 - p0) / (x * x - 1)
            dx = p1 / dp
            x -= dx
            if done:
                break
            # quadratic convergence: one step past the ulp scale is enough
            done = abs(dx) < tol
        p0, p1 = mp.mpf(1), x
        for j in range(2, m + 1):
            p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
        dp = m * (x * p1 - p0) / (x * x - 1)
        nodes.append((x + 1) / 2)
        weights.append(1 / ((1 - x * x) * dp * dp))
    out = (nodes, weights)
    _GL_CACHE[key] = out
    return out


def nodes_per_panel(ctx: PrecisionCtx, rho: float = RHO_TARGET) -> int:
    return int(math.ceil(ctx.digits * math.log(10) / (2 * math.log(rho)))) + 6


def _bernstein_rho(x: complex) -> float:
    r = x + np.sqrt(x * x - 1 + 0j)
    return max(abs(r), 1.0 / max(abs(r), 1e-300))


def panelize(preimages, rho: float = RHO_TARGET, max_depth: int = 60):
    """Split [0, 1] until every singular preimage is outside the rho-ellipse of its panel."""
    pre = [complex(p) for p in preimages]
    out = []
    stack = [(0.0, 1.0, 0)]
    while stack:
        a, b, depth = stack.pop()
        c, h = (a + b) / 2, (b - a) / 2
        ok = True
        for p in pre:
            if _bernstein_rho((p - c) / h) < rho:
                ok = False
                break
        if ok or depth >= max_depth:
            out.append((a, b))
        else:
            stack.append((c, b, depth + 1))
            stack.append((a, c, depth + 1))
    out.sort()
    return out


# ---------------------------------------------------------------- legs

@dataclass(frozen=True)
class Leg:
    """Parametrized piece of a path, x in [0, 1].

    kinds: line A->B; sqrt_start (A is a branch point, t = A + (B-A)x^2);
    sqrt_end (B is a branch point); ray (A + e*L*x/(1-x), e unit).
    """

    kind: str
    A: complex
    B: complex = 0j
    L: float = 1.0

    def point(self, x, mp=None):
        A, B = self.A, self.B
        if self.kind == "line":
            return A + (B - A) * x
        if self.kind == "sqrt_start":
            return A + (B - A) * x * x
        if self.kind == "sqrt_end":
            return B + (A - B) * (1 - x) ** 2
        if self.kind == "ray":
            return A + B * self.L * x / (1 - x)
        raise ValueError(self.kind)

    def deriv(self, x):
        A, B = self.A, self.B
        if self.kind == "line":
            return B - A
        if self.kind == "sqrt_start":
            return 2 * (B - A) * x
        if self.kind == "sqrt_end":
            return 2 * (B - A) * (1 - x)
        if self.kind == "ray":
            return B * self.L / (1 - x) ** 2
        raise ValueError(self.kind)

    def preimages(self, p: complex):
        A, B = complex(self.A), complex(self.B)
        if self.kind == "line":
            return [(p - A) / (B - A)] if B != A else []
        if self.kind == "sqrt_start":
            r = np.sqrt((p - A) / (B - A) + 0j)
            return [r, -r]
        if self.kind == "sqrt_end":
            r = np.sqrt((p - B) / (A - B) + 0j)
            return [1 - r, 1 + r]
        if self.kind == "ray":
            y = (p - A) / (B * self.L)
            return [y / (1 + y)] if abs(1 + y) > 1e-300 else []
        raise ValueError(self.kind)

    @property
    def start(self):
        return self.A if self.kind != "sqrt_end" else self.A

    @property
    def end(self):
        return None if self.kind == "ray" else self.B


# ---------------------------------------------------------------- geometry

def _seg_intersections(p, q, poly):
    """Number of proper crossings of segment pq with polyline poly (numpy)."""
    a = poly[:-1]
    b = poly[1:]

    def orient(u, v, w):
        return np.sign(((v - u).conjugate() * (w - u)).imag)

    o1 = orient(p, q, a)
    o2 = orient(p, q, b)
    o3 = orient(a, b, p)
    o4 = orient(a, b, q)
    return int(np.count_nonzero((o1 * o2 < 0) & (o3 * o4 < 0)))


def _point_seg_dist(z, a, b):
    ab = b - a
    den = (ab * ab.conjugate()).real
    den = np.where(den == 0, 1.0, den)
    t = np.clip(((z - a) * ab.conjugate()).real / den, 0.0, 1.0)
    return np.abs(z - (a + t * ab))


def _seg_seg_dist(p, q, a, b):
    """Distance between segment pq and each segment (a_i, b_i)."""
    d = np.minimum(_point_seg_dist(p, a, b), _point_seg_dist(q, a, b))
    d = np.minimum(d, _point_seg_dist(a, p, q))
    d = np.minimum(d, _point_seg_dist(b, p, q))
    return d


class Star:
    """Anchors a1..a3 (clockwise), center a0 and, once traced, the arcs."""

    def __init__(self, anchors, a0, ctx: PrecisionCtx, arcs=None, base: int = 1):
        mp = ctx.mp
        self.ctx = ctx
        self.a = [mp.mpc(a0)] + [mp.mpc(x) for x in anchors]
        self.ad = np.array([complex(x) for x in self.a])
        self.A = sum(self.a) / 2
        self.c = complex(np.mean(self.ad[1:]))
        self.diam = float(max(abs(self.ad[i] - self.ad[j]) for i in range(1, 4) for j in range(1, 4)))
        self.r_T = float(np.max(np.abs(self.ad - self.c)))
        self.Rc = 1.6 * self.r_T
        self.m = nodes_per_panel(ctx)
        self.arcs = None
        self.polys = None
        if arcs is not None:
            self.set_arcs(arcs)
        # routes start at the branch point a_base and leave along the ray from c through it
        self.base = base
        e1 = self.ad[base] - self.c
        self.e1 = e1 / abs(e1)
        self.H = self.c + self.Rc * self.e1
        self._prefix_cache = {}
        self._seg_cache = {}
        self._panels = {}

    # ---- arcs and lenses

    def set_arcs(self, arcs):
        self.arcs = arcs
        self.polys = [np.asarray(arc.samples, dtype=complex) for arc in arcs]
        allpts = np.concatenate(self.polys)
        self._delta_a = np.concatenate([p[:-1] for p in self.polys])
        self._delta_b = np.concatenate([p[1:] for p in self.polys])
        self._delta_pts = allpts

    def dist_to_delta(self, z) -> float:
        if self.polys is None:
            # chord approximation
            return float(min(_point_seg_dist(np.array([complex(z)]), self.ad[0], self.ad[k])[0] for k in (1, 2, 3)))
        return float(np.min(_point_seg_dist(complex(z), self._delta_a, self._delta_b)))

    def nearest_on_delta(self, z):
        z = complex(z)
        d = _point_seg_dist(z, self._delta_a, self._delta_b)
        i = int(np.argmin(d))
        a, b = self._delta_a[i], self._delta_b[i]
        ab = b - a
        t = min(max(((z - a) * ab.conjugate()).real / max(abs(ab) ** 2, 1e-300), 0.0), 1.0)
        return a + t * ab

    def crossings(self, p, q) -> int:
        if self.polys is None:
            return 0
        return sum(_seg_intersections(complex(p), complex(q), poly) for poly in self.polys)

    def in_lens(self, z, k: int) -> bool:
        """Parity test: is z between arc k and its chord [a0, a_k]?"""
        if self.polys is None:
            return False
        poly = self.polys[k - 1]
        z = complex(z)
        x, y = poly.real, poly.imag
        lo, hi = min(x.min(), self.ad[0].real, self.ad[k].real), max(x.max(), self.ad[0].real, self.ad[k].real)
        if not (lo - 1e-12 <= z.real <= hi + 1e-12):
            return False
        # polygon: arc samples a0 -> a_k, closed by the chord back to a0
        xs = np.append(x, x[0])
        ys = np.append(y, y[0])
        x0, y0, x1, y1 = xs[:-1], ys[:-1], xs[1:], ys[1:]
        cond = (y0 > z.imag) != (y1 > z.imag)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x0 + (z.imag - y0) * (x1 - x0) / (y1 - y0)
        return bool(np.count_nonzero(cond & (z.real < xint)) % 2)

    def lens_index(self, z):
        for k in (1, 2, 3):
            if self.in_lens(z, k):
                return k
        return 0

    # ---- square roots

    def P(self, t):
        a = self.a
        return (t - a[0]) * (t - a[1]) * (t - a[2]) * (t - a[3])

    def w_star(self, t):
        mp = self.ctx.mp
        a = self.a
        u = t - a[0]
        return u * u * mp.sqrt((t - a[1]) / u) * mp.sqrt((t - a[2]) / u) * mp.sqrt((t - a[3]) / u)

    def w_far(self, t):
        """Sheet-1 branch, valid outside the disk enclosing all branch points."""
        mp = self.ctx.mp
        c = mp.mpc(self.c)
        u = t - c
        out = u * u
        for aj in self.a:
            out *= mp.sqrt(1 - (aj - c) / u)
        return out

    def is_far(self, z) -> bool:
        return abs(complex(z) - self.c) > 1.05 * self.r_T

    # ---- chord rules for arc integrals

    def chord_rule(self, k: int, extra=()):
        """Nodes t_i and weights v_i with sum g(t_i) v_i = ∫_{arc k} g(t) dt / w_plus(t).

        ``extra`` lists singular points of g that the panels must resolve.
        """
        ts, vs, _ = self.chord_nodes(k, extra)
        return ts, vs

    def chord_nodes(self, k: int, extra=()):
        """chord_rule plus the left trace of w_star at each node."""
        key = (k, tuple(complex(e) for e in extra))
        hit = self._seg_cache.get(key)
        if hit is not None:
            return hit
        mp = self.ctx.mp
        a0, ak = self.a[0], self.a[k]
        d = ak - a0
        sing = [self.ad[j] for j in (1, 2, 3) if j != k] + [complex(e) for e in extra]
        pre = []
        for p in sing:
            pre += self._chord_preimages(k, p)
        panels = panelize(pre)
        if not extra:
            self._panels[k] = panels
        gx, gw = gauss_legendre(self.m, self.ctx)
        others = [j for j in (1, 2, 3) if j != k]
        ts, vs, ws = [], [], []
        pi = mp.pi
        for lo, hi in panels:
            lo_, span = mp.mpf(lo), mp.mpf(hi - lo)
            for x, wt in zip(gx, gw):
                th = pi * (lo_ + span * x)
                s = (1 - mp.cos(th)) / 2
                t = a0 + d * s
                R = 1j * d * d * s
                for j in others:
                    R *= mp.sqrt((t - self.a[j]) / (t - a0))
                ts.append(t)
                vs.append(d / R * pi * span * wt)
                ws.append(R * mp.sin(th) / 2)
        out = (ts, vs, ws)
        if len(self._seg_cache) > 4096:
            self._seg_cache = {kk: v for kk, v in self._seg_cache.items() if not kk[1]}
        self._seg_cache[key] = out
        return out

    def _chord_preimages(self, k, p):
        s = (complex(p) - self.ad[0]) / (self.ad[k] - self.ad[0])
        th = np.arccos(1 - 2 * s + 0j) / np.pi
        return [th, -th, 2 - th]

    def chord_nodes_at(self, k: int, z):
        """Nodes for an integrand with a pole at z: the cached base rule when it already resolves z."""
        base = self.chord_nodes(k)
        pre = self._chord_preimages(k, z)
        for lo, hi in self._panels[k]:
            c, h = (lo + hi) / 2, (hi - lo) / 2
            if any(_bernstein_rho((p - c) / h) < RHO_TARGET for p in pre):
                return self.chord_nodes(k, (z,))
        return base

    def arc_integral(self, g, k: int, extra=()):
        ts, vs = self.chord_rule(k, extra)
        return sum(g(t) * v for t, v in zip(ts, vs))

    def upper_trace_on_chord(self, k: int, s):
        """w_star from the left of the chord [a0, a_k] at parameter s in (0, 1)."""
        mp = self.ctx.mp
        a0 = self.a[0]
        d = self.a[k] - a0
        t = a0 + d * s
        out = 1j * d * d * s * mp.sqrt(s * (1 - s))
        for j in (1, 2, 3):
            if j != k:
                out *= mp.sqrt((t - self.a[j]) / (t - a0))
        return out

    # ---- sheet-1 branch off the cut

    def w1(self, z):
        """Sheet-1 w at a point off Δ, via lens parity and the straight-cut branch."""
        mp = self.ctx.mp
        z = mp.mpc(z)
        if self.is_far(z):
            return self.w_far(z)
        zd = complex(z)
        sign = -1 if sum(self.in_lens(zd, k) for k in (1, 2, 3)) % 2 else 1
        for k in (1, 2, 3):
            if self._on_chord(zd, k):
                # the chord bounds lens k; sheet-1 w equals the lower trace of w_star there
                if self.polys is None or self.dist_to_delta(zd) <= 1e-14 * self.diam:
                    raise AmbiguousTraceError(f"{zd} lies on the cut")
                s = (z - self.a[0]) / (self.a[k] - self.a[0])
                lens_sign = -1 if sum(self.in_lens(zd, j) for j in (1, 2, 3) if j != k) % 2 else 1
                return -lens_sign * self.upper_trace_on_chord(k, mp.re(s))
        return sign * self.w_star(z)

    def _on_chord(self, zd, k):
        a0, ak = self.ad[0], self.ad[k]
        s = (zd - a0) / (ak - a0)
        return s.imag == 0 and 0 < s.real < 1

    # ---- routing

    NV = 36

    def _vertex(self, j):
        if j == 0:
            return self.H
        phi = math.atan2((self.H - self.c).imag, (self.H - self.c).real) + 2 * math.pi * j / self.NV
        return self.c + self.Rc * complex(math.cos(phi), math.sin(phi))

    def _ray_circle(self, z, v):
        p = z - self.c
        b = (p * v.conjugate()).real
        cc = abs(p) ** 2 - self.Rc ** 2
        s = -b + math.sqrt(max(b * b - cc, 0.0))
        return z + s * v

    def _clearance(self, p, q, skip=None):
        pts = self.ad if skip is None else np.delete(self.ad, skip)
        dpts = float(np.min(_point_seg_dist(pts, p, q)))
        if self.polys is None:
            dd = min(float(np.min(_point_seg_dist(self.ad[k] + (self.ad[0] - self.ad[k]) * np.linspace(0, 1, 64), p, q)))
                     for k in (1, 2, 3))
            return min(dd, dpts)
        dd = float(np.min(_seg_seg_dist(p, q, self._delta_a, self._delta_b)))
        return min(dd, dpts)

    def _cut_crossings(self, p, q):
        if self.polys is not None:
            return self.crossings(p, q)
        n = 0
        for k in (1, 2, 3):
            chord = np.array([self.ad[0], self.ad[k]])
            n += _seg_intersections(complex(p), complex(q), chord)
        return n

    def escape_point(self, z, avoid=()):
        """A point E on the routing circle with [E, z] free of the cut."""
        z = complex(z)
        if abs(z - self.c) >= self.Rc:
            u = (z - self.c) / abs(z - self.c)
            return self.c + self.Rc * u
        bd = np.abs(self.ad - z)
        skip = int(np.argmin(bd))
        at_branch = bd[skip] <= 1e-12 * self.diam
        if at_branch:
            delta = 0.2 * float(np.min(np.delete(bd, skip)))
            dz = 0.0
        else:
            skip = None
            dz = self.dist_to_delta(z)
        cands = []
        if self.polys is not None and not at_branch:
            near = self.nearest_on_delta(z)
            if abs(z - near) > 0:
                cands.append((z - near) / abs(z - near))
        for v in (z - self.ad[0], z - self.c):
            if abs(v) > 0:
                cands.append(v / abs(v))
        cands += [complex(math.cos(2 * math.pi * j / 72), math.sin(2 * math.pi * j / 72)) for j in range(72)]
        best, best_score = None, -1.0
        for i, v in enumerate(cands):
            E = self._ray_circle(z, v)
            if at_branch:
                start = z + v * delta
                if self.dist_to_delta(start) < 0.2 * delta or self._cut_crossings(start, E):
                    continue
            else:
                if self._cut_crossings(z, E):
                    continue
                start = z + v * min(0.5 * dz, 0.5 * abs(E - z))
            score = self._clearance(start, E, skip)
            for p in avoid:
                score = min(score, float(_point_seg_dist(np.array([complex(p)]), start, E)[0]))
            if score > best_score:
                best, best_score = E, score
            if i < 3 and best_score > 0.05 * self.diam:
                break
        if best is None:
            raise PathError(f"no cut-free escape direction from {z}")
        return best

    def route_points(self, z, avoid=()):
        """Polyline a_base -> H -> circle vertices -> E -> z (no cut crossings).

        Returns (j, E, tail_kind) where the prefix ends at vertex j.
        """
        z = complex(z)
        E = self.escape_point(z, avoid)
        phiH = math.atan2((self.H - self.c).imag, (self.H - self.c).real)
        phiE = math.atan2((E - self.c).imag, (E - self.c).real)
        d = (phiE - phiH + math.pi) % (2 * math.pi) - math.pi
        j = int(round(d / (2 * math.pi / self.NV)))
        return j, E

    # ---- path integration with branch continuity

    def _sqrtP(self, t):
        return self.ctx.mp.sqrt(self.P(t))

    def _leg_nodes(self, leg, sing):
        mp = self.ctx.mp
        gx, gw = gauss_legendre(self.m, self.ctx)
        pre = []
        for p in sing:
            if leg.kind == "sqrt_start" and abs(p - complex(leg.A)) < 1e-300:
                continue
            if leg.kind == "sqrt_end" and abs(p - complex(leg.B)) < 1e-300:
                continue
            pre += leg.preimages(p)
        nodes = []
        for lo, hi in panelize(pre):
            span = mp.mpf(hi - lo)
            lo_ = mp.mpf(lo)
            for x, wt in zip(gx, gw):
                nodes.append((lo_ + span * x, span * wt))
        return nodes

    def integrate_leg(self, leg, W_ref, funcs, poles=()):
        """∫ funcs(t, W) dt over one leg; W continues from W_ref at the regular end.

        Returns (vector, W at the far end) where 'far' is B for forward legs
        and A for a sqrt_start leg.
        """
        mp = self.ctx.mp
        A = mp.mpc(leg.A)
        B = mp.mpc(leg.B)
        legm = Leg(leg.kind, A, B, leg.L)
        sing = list(self.ad) + [complex(p) for p in poles]
        nodes = self._leg_nodes(leg, sing)
        if leg.kind == "sqrt_start":
            nodes = nodes[::-1]
        W = W_ref
        acc = None
        for xx, wt in nodes:
            t = legm.point(xx)
            r = self._sqrtP(t)
            W = r if abs(r - W) <= abs(r + W) else -r
            vals = funcs(t, W)
            dt = legm.deriv(xx) * wt
            if acc is None:
                acc = [v * dt for v in vals]
            else:
                for i, v in enumerate(vals):
                    acc[i] += v * dt
        if leg.kind in ("sqrt_start", "sqrt_end"):
            W_end = mp.mpc(0)
        elif leg.kind == "ray":
            W_end = None
        else:
            r = self._sqrtP(B)
            W_end = r if abs(r - W) <= abs(r + W) else -r
        return acc, W_end

    def integrate_route(self, legs, funcs, poles=(), per_leg=False):
        """Integrate along consecutive legs starting at a1 (first leg sqrt_start to a far point)."""
        parts = []
        W = None
        for leg in legs:
            if leg.kind == "sqrt_start":
                acc, _ = self.integrate_leg(leg, self.w_far(self.ctx.mp.mpc(leg.B)), funcs, poles)
                W = self.w_far(self.ctx.mp.mpc(leg.B))
            else:
                if W is None:
                    W = self.w_far(self.ctx.mp.mpc(leg.A))
                acc, W = self.integrate_leg(leg, W, funcs, poles)
            parts.append(acc)
        if per_leg:
            return parts, W
        total = [sum(col) for col in zip(*parts)]
        return total, W

    def route(self, z):
        """Legs from a_base to z on sheet 1.  z may be 'inf'."""
        legs = [Leg("sqrt_start", self.a[self.base], self.H)]
        if isinstance(z, str):
            legs.append(Leg("ray", self.H, self.e1, self.Rc))
            return legs
        j, E = self.route_points(z)
        step = 1 if j > 0 else -1
        for i in range(0, j, step):
            legs.append(Leg("line", self._vertex(i), self._vertex(i + step)))
        legs.append(Leg("line", self._vertex(j), E))
        z = complex(z)
        if any(abs(z - b) == 0 for b in self.ad):
            legs.append(Leg("sqrt_end", E, z))
        elif abs(z - E) > 0:
            legs.append(Leg("line", E, z))
        return legs

    # ---- the standard integral vector

    @staticmethod
    def _basis(poles):
        def f(t, W):
            iw = 1 / W
            out = [iw, t * iw]
            for a in poles:
                out.append(iw / (t - a))
            return out

        return f

    def _prefix(self, j, poles):
        """Integral vector from a_base to circle vertex j, with W there."""
        key = tuple(poles)
        cache = self._prefix_cache.setdefault(key, {})
        if j in cache:
            return cache[j]
        mp = self.ctx.mp
        pm = [mp.mpc(a) for a in poles]
        f = self._basis(pm)
        if j == 0:
            leg = Leg("sqrt_start", self.a[self.base], self.H)
            W = self.w_far(mp.mpc(self.H))
            vec, _ = self.integrate_leg(leg, W, f, poles)
            out = (vec, W)
        else:
            prev = j - 1 if j > 0 else j + 1
            pvec, pW = self._prefix(prev, poles)
            vec, W = self.integrate_leg(Leg("line", self._vertex(prev), self._vertex(j)), pW, f, poles)
            out = ([x + y for x, y in zip(pvec, vec)], W)
        cache[j] = out
        return out

    def integrals(self, z, poles=()):
        """Sheet-1 route integrals from a_base to z.

        Returns (vec, W, logs): vec = [∫dt/W, ∫t dt/W, ∫dt/((t-a)W) for a in poles],
        W = sheet-1 w at z (by continuation), logs = continuous log(t - a) at z
        for each pole (starting from the principal value at a_base, or at H when a = a_base).
        """
        mp = self.ctx.mp
        z = mp.mpc(z)
        zd = complex(z)
        j, E = self.route_points(zd, avoid=[complex(a) for a in poles])
        vec, W = self._prefix(j, poles)
        pm = [mp.mpc(a) for a in poles]
        f = self._basis(pm)
        pts = [mp.mpc(self._vertex(j)), mp.mpc(E)]
        v2, W = self.integrate_leg(Leg("line", self._vertex(j), E), W, f, poles)
        vec = [x + y for x, y in zip(vec, v2)]
        if any(z == b for b in self.a):
            v3, W = self.integrate_leg(Leg("sqrt_end", E, z), W, f, poles)
            vec = [x + y for x, y in zip(vec, v3)]
            pts.append(z)
        elif abs(zd - E) > 0:
            v3, W = self.integrate_leg(Leg("line", E, z), W, f, poles)
            vec = [x + y for x, y in zip(vec, v3)]
            pts.append(z)
        logs = [self._path_log(a, j, pts) for a in pm]
        return vec, W, logs

    def _vertex_path(self, j):
        step = 1 if j > 0 else -1
        return [self._vertex(i) for i in range(0, j + step, step)] if j != 0 else [self._vertex(0)]

    def _path_log(self, a, j, tail):
        """Continuous log(t - a) along a_base -> H -> vertices -> tail."""
        mp = self.ctx.mp
        a1 = self.a[self.base]
        if abs(a - a1) == 0:
            val = mp.log(mp.mpc(self.H) - a)
        else:
            val = mp.log(a1 - a)
            val += mp.log((mp.mpc(self.H) - a) / (a1 - a))
        prev = mp.mpc(self.H)
        for v in self._vertex_path(j)[1:] + tail:
            v = mp.mpc(v)
            val += mp.log((v - a) / (prev - a))
            prev = v
        return val

    def integrals_inf(self, poles=()):
        """Regularized route integrals from a_base to ∞ on sheet 1 (along the ray through H).

        vec[1] is lim(∫t dt/W - Log(t - c)); logs are lim(log(t - a) - Log(t - c)).
        """
        key = ("inf",) + tuple(poles)
        hit = self._prefix_cache.get(key)
        if hit is not None:
            return hit
        mp = self.ctx.mp
        c = mp.mpc(self.c)
        pm = [mp.mpc(a) for a in poles]
        vec0, W0 = self._prefix(0, poles)
        base = self._basis(pm)

        def f(t, W):
            out = base(t, W)
            out[1] = out[1] - 1 / (t - c)
            return out

        ray = Leg("ray", self.H, self.e1, self.Rc)
        v1, _ = self.integrate_leg(ray, W0, f, poles)
        H = mp.mpc(self.H)
        vec = [x + y for x, y in zip(vec0, v1)]
        vec[1] -= mp.log(H - c)
        e = mp.mpc(self.e1)
        logs = []
        for a in pm:
            LH = self._path_log(a, 0, [])
            logs.append(LH + mp.log(e / (H - a)) - mp.log(e))
        out = (vec, logs)
        self._prefix_cache[key] = out
        return out
