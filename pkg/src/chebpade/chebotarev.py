"""Chebotarëv continuum of three points: center, arc masses, arcs, capacity.

The center a0 is found from the period conditions: the mass
a0*beta_k - beta1_k carried by each arc has to be real.  Those masses are
holomorphic in a0 with derivative beta_k/2, which gives a clean Newton
iteration.  The classical elliptic system (p, k, mu) is then evaluated at
the result, polished, and required to agree, so every returned center has
been confirmed by two unrelated characterizations.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConstraintError, GeometryError, SolverError, TracingError
from .geometry import Star
from .mpnum import PrecisionCtx, elliptic_K, jacobi_cn, theta4

AREA_TOL = 1e-10


# ---------------------------------------------------------------- triples

@dataclass(frozen=True)
class Triple:
    """Three anchors plus the affine normalization onto (0, e^{iα}, ρ²e^{-iα}).

    ``perm[j]`` is the raw index of normalized point j; raw points are
    recovered as ``scale * (conj(v) if conjugated else v) + shift``.
    """

    a1: complex
    a2: complex
    a3: complex
    scale: complex
    shift: complex
    conjugated: bool
    perm: tuple
    alpha: float
    rho: float

    @property
    def raw(self):
        return (self.a1, self.a2, self.a3)

    @property
    def affine_map(self):
        return (self.scale, self.shift)

    def to_normalized(self, z):
        v = (z - self.shift) / self.scale
        return v.conjugate() if self.conjugated else v

    def from_normalized(self, v):
        if self.conjugated:
            v = v.conjugate()
        return self.scale * v + self.shift

    def normalized(self):
        return tuple(self.to_normalized(self.raw[j]) for j in self.perm)


def _check_triple(pts):
    pts = [complex(p) for p in pts]
    diam = max(abs(pts[i] - pts[j]) for i in range(3) for j in range(3))
    if diam == 0 or min(abs(pts[i] - pts[j]) for i, j in ((0, 1), (0, 2), (1, 2))) <= 1e-14 * diam:
        raise GeometryError("anchors must be pairwise distinct")
    area = abs(((pts[1] - pts[0]).conjugate() * (pts[2] - pts[0])).imag) / 2
    if area < AREA_TOL * diam * diam:
        raise GeometryError("non-collinear required: anchors are (nearly) collinear")
    return pts


def normalize_triple(raw) -> Triple:
    """Anchors keep their input type, so mpmath anchors stay exact beyond double precision."""
    raw = tuple(raw)
    pts = _check_triple(raw)
    choice = None
    for i0 in range(3):
        j, l = [x for x in range(3) if x != i0]
        dj, dl = pts[j] - pts[i0], pts[l] - pts[i0]
        far, near = (j, l) if abs(dj) >= abs(dl) else (l, j)
        rho = math.sqrt(abs(pts[near] - pts[i0]) / abs(pts[far] - pts[i0]))
        if choice is None or (choice[3] >= 1 - 1e-12 and rho < 1 - 1e-12):
            choice = (i0, far, near, rho)
    i0, far, near, rho = choice
    df, dn = pts[far] - pts[i0], pts[near] - pts[i0]
    half = np.angle(dn / df) / 2
    bis = np.angle(df) + half
    alpha = abs(half)
    scale = abs(df) * complex(math.cos(bis), math.sin(bis))
    conj = half > 0  # far point sits clockwise of the bisector
    return Triple(raw[0], raw[1], raw[2], scale, pts[i0], bool(conj), (i0, far, near), float(alpha), float(rho))


# ---------------------------------------------------------------- data types

@dataclass(frozen=True)
class Arc:
    """A traced arc from a0 (first sample) to its anchor (last sample)."""

    index: int
    samples: np.ndarray
    chord_param: np.ndarray
    endpoint_tangents: tuple
    tangents: Optional[np.ndarray] = field(default=None, repr=False)
    splice_gap: float = 0.0

    def trajectory_residual(self, a0, anchors):
        """max |Im q|/|q| over interior samples of q = (z-a0)/∏(z-a_k)·z'^2 (inf if q >= 0 anywhere)."""
        z = self.samples[1:-1]
        dz = self.tangents[1:-1]
        q = (z - a0) / ((z - anchors[0]) * (z - anchors[1]) * (z - anchors[2])) * dz * dz
        if np.any(q.real >= 0):
            return float("inf")
        return float(np.max(np.abs(q.imag) / np.abs(q)))


@dataclass(frozen=True)
class ChebotarevData:
    """Center, arc masses and (optionally) arcs and capacity.

    Anchors are stored in surface order: ``anchors[0]`` is the first raw
    point and the three are clockwise around a0.  ``labels[k]`` is the raw
    index of ``anchors[k]``; ``weights`` follow the surface order.
    """

    triple: Triple
    a0: object
    anchors: tuple
    labels: tuple
    weights: tuple
    lambda1: float
    lambda2: float
    p: object
    k: object
    mu: object
    Z: object
    elliptic_residuals: tuple
    ctx: PrecisionCtx = field(repr=False)
    arcs: Optional[tuple] = None
    capacity: Optional[float] = None
    xi: Optional[complex] = None
    betas: Optional[tuple] = field(default=None, repr=False)
    beta1s: Optional[tuple] = field(default=None, repr=False)

    @property
    def raw_weights(self):
        out = [0.0, 0.0, 0.0]
        for k, lab in enumerate(self.labels):
            out[lab] = self.weights[k]
        return tuple(out)

    def star(self) -> Star:
        return Star(self.anchors, self.a0, self.ctx, arcs=self.arcs)

    def to_json(self) -> dict:
        c = lambda z: [float(complex(z).real), float(complex(z).imag)]
        out = {
            "anchors": [c(a) for a in self.triple.raw],
            "center": c(self.a0),
            "weights": [float(w) for w in self.raw_weights],
            "capacity": None if self.capacity is None else float(self.capacity),
            "lambda1": float(self.lambda1),
            "lambda2": float(self.lambda2),
            "elliptic": {"p": c(self.p), "k": c(self.k), "mu": c(self.mu), "Z": c(self.Z)},
            "residuals": [float(r) for r in self.elliptic_residuals],
            "normalization": {
                "scale": c(self.triple.scale),
                "shift": c(self.triple.shift),
                "conjugated": self.triple.conjugated,
                "perm": list(self.triple.perm),
                "alpha": self.triple.alpha,
                "rho": self.triple.rho,
            },
            "digits": self.ctx.digits,
        }
        return out


def write_arcs_csv(data: ChebotarevData, path):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["k", "t", "re", "im"])
        for arc in data.arcs:
            lab = data.labels[arc.index - 1] + 1
            for t, z in zip(arc.chord_param, arc.samples):
                wr.writerow([lab, f"{t:.17g}", f"{z.real:.17g}", f"{z.imag:.17g}"])


def write_json(data: ChebotarevData, path):
    with open(path, "w") as fh:
        json.dump(data.to_json(), fh, indent=2, sort_keys=True)


# ---------------------------------------------------------------- center via periods

def surface_order(raw):
    """Keep the first point, order the other two clockwise."""
    a = [complex(x) for x in raw]
    orient = ((a[1] - a[0]).conjugate() * (a[2] - a[0])).imag
    return (0, 1, 2) if orient < 0 else (0, 2, 1)


def _fermat_point(pts):
    z = sum(pts) / 3
    for _ in range(500):
        d = [abs(z - p) for p in pts]
        if min(d) < 1e-14:
            break
        znew = sum(p / di for p, di in zip(pts, d)) / sum(1 / di for di in d)
        if abs(znew - z) < 1e-15:
            z = znew
            break
        z = znew
    return z


def periods_at(anchors, a0, ctx):
    """(beta_k, beta1_k) for k = 1..3 with the 1/(πi) normalization."""
    star = Star(anchors, a0, ctx)
    mp = ctx.mp
    pii = mp.pi * 1j
    betas, beta1s = [], []
    for k in (1, 2, 3):
        ts, vs = star.chord_rule(k)
        betas.append(sum(vs) / pii)
        beta1s.append(sum(t * v for t, v in zip(ts, vs)) / pii)
    return betas, beta1s


def _inside(z, pts):
    s = []
    for i in range(3):
        a, b = pts[i], pts[(i + 1) % 3]
        s.append(((b - a).conjugate() * (z - a)).imag)
    return all(x > 0 for x in s) or all(x < 0 for x in s)


def center_from_periods(anchors, ctx: PrecisionCtx, max_iter: int = 80):
    mp = ctx.mp
    pts = [complex(a) for a in anchors]
    a0 = mp.mpc(_fermat_point(pts))
    tol = ctx.series_tol * max(abs(p) for p in pts) if max(abs(p) for p in pts) > 1 else ctx.series_tol

    def resid(z):
        b, b1 = periods_at(anchors, z, ctx)
        om = [z * b[k] - b1[k] for k in range(3)]
        return b, om, mp.sqrt(mp.im(om[1]) ** 2 + mp.im(om[2]) ** 2)

    b, om, r = resid(a0)
    for _ in range(max_iter):
        if r < tol:
            return a0, b, om
        d2, d3 = b[1] / 2, b[2] / 2
        J = mp.matrix([[mp.im(d2), mp.re(d2)], [mp.im(d3), mp.re(d3)]])
        rhs = mp.matrix([-mp.im(om[1]), -mp.im(om[2])])
        step = mp.lu_solve(J, rhs)
        dz = mp.mpc(step[0], step[1])
        lam = mp.mpf(1)
        while True:
            cand = a0 + lam * dz
            if _inside(complex(cand), pts):
                bc, omc, rc = resid(cand)
                if rc < r or lam < 1e-6:
                    break
            lam /= 2
            if lam < 1e-12:
                raise SolverError("center iteration stalled", residuals=(float(r),))
        a0, b, om, r = cand, bc, omc, rc
    raise SolverError("center iteration did not converge", residuals=(float(r),))


# ---------------------------------------------------------------- the elliptic system

def _A0_of(p, k, mp):
    return mp.sqrt(p * p + 2 * p + 1 - 4 * k * k * p)


def elliptic_lambdas(k, mu, ctx):
    """(λ1, λ2, K, K') read off from μ = λ1·K(k) - iλ2·K(k')."""
    mp = ctx.mp
    mod = elliptic_K(k, ctx)
    K, Kp = mod.K, mod.K_prime
    den = mp.re(mp.conj(K) * Kp)
    lam1 = mp.re(mp.conj(mu) * Kp) / den
    lam2 = mp.im(mp.conj(mu) * K) / den
    return lam1, lam2, K, Kp


def elliptic_residuals(p, k, mu, Z, ctx):
    """(H1, H2, H3) of the reduced system."""
    mp = ctx.mp
    A0 = _A0_of(p, k, mp)
    H1 = 2 * k * k * p - p - 1 + Z * A0 / 2
    H2 = jacobi_cn(mu, k, ctx) - (1 - p) / (1 + p)
    lam1, lam2, K, Kp = elliptic_lambdas(k, mu, ctx)
    tau = 1j * Kp / K
    th, dth = theta4(mu / (2 * K), tau, ctx)
    H3 = 2 * K * (A0 * mp.sqrt(p) / (1 + p) - dth / (2 * K * th)) + 1j * mp.pi * lam2
    return H1, H2, H3


def _elliptic_polish(p, k, mu, Z, ctx, max_iter=40):
    mp = ctx.mp
    x = [mp.re(p), mp.im(p), mp.re(k), mp.im(k), mp.re(mu), mp.im(mu)]

    def F(x):
        h = elliptic_residuals(mp.mpc(x[0], x[1]), mp.mpc(x[2], x[3]), mp.mpc(x[4], x[5]), Z, ctx)
        return [mp.re(h[0]), mp.im(h[0]), mp.re(h[1]), mp.im(h[1]), mp.re(h[2]), mp.im(h[2])]

    f = F(x)
    tol = mp.mpf(10) ** (-ctx.digits + ctx.guard)
    eps = mp.mpf(10) ** (-(ctx.digits // 2))
    for _ in range(max_iter):
        nrm = max(abs(v) for v in f)
        if nrm < tol:
            break
        J = mp.matrix(6, 6)
        for j in range(6):
            xp = list(x)
            xm = list(x)
            xp[j] += eps
            xm[j] -= eps
            fp, fm = F(xp), F(xm)
            for i in range(6):
                J[i, j] = (fp[i] - fm[i]) / (2 * eps)
        dx = mp.lu_solve(J, mp.matrix([-v for v in f]))
        xn = [x[i] + dx[i] for i in range(6)]
        fn = F(xn)
        if max(abs(v) for v in fn) >= nrm:
            break
        x, f = xn, fn
    return mp.mpc(x[0], x[1]), mp.mpc(x[2], x[3]), mp.mpc(x[4], x[5]), [abs(mp.mpc(f[0], f[1])), abs(mp.mpc(f[2], f[3])), abs(mp.mpc(f[4], f[5]))]


def _mp_normalization(triple: Triple, mp):
    """(ρ, α, scale, shift) of the triple recomputed at working precision."""
    pts = [mp.mpc(x) for x in triple.raw]
    i0, far, near = triple.perm
    df, dn = pts[far] - pts[i0], pts[near] - pts[i0]
    rho = mp.sqrt(abs(dn) / abs(df))
    half = mp.arg(dn / df) / 2
    scale = abs(df) * mp.expj(mp.arg(df) + half)
    return rho, abs(half), scale, pts[i0]


def solve_center(triple: Triple, ctx: PrecisionCtx) -> ChebotarevData:
    mp = ctx.mp
    order = surface_order(triple.raw)
    anchors = tuple(mp.mpc(triple.raw[j]) for j in order)
    a0, betas, om = center_from_periods(anchors, ctx)
    weights = [mp.re(x) for x in om]
    if min(weights) <= 0:
        raise ConstraintError("non-positive arc mass", residuals=tuple(float(x) for x in weights))
    w_raw = {order[k]: weights[k] for k in range(3)}

    # elliptic system in normalized coordinates
    rho, alpha, scale, shift = _mp_normalization(triple, mp)
    Z = rho * mp.expj(-alpha) + 1 / (rho * mp.expj(-alpha))
    nu0 = (a0 - shift) / scale
    if triple.conjugated:
        nu0 = mp.conj(nu0)
    A0 = nu0 / rho
    p = mp.sqrt(1 - Z * A0 + A0 * A0)
    k = mp.sqrt((p + 1 - Z * A0 / 2) / (2 * p))
    lam1 = w_raw[triple.perm[1]] + w_raw[triple.perm[2]]
    lam2 = w_raw[triple.perm[1]] - w_raw[triple.perm[2]]
    Kk = elliptic_K(k, ctx)
    mu = lam1 * Kk.K - 1j * lam2 * Kk.K_prime
    seed_res = [abs(h) for h in elliptic_residuals(p, k, mu, Z, ctx)]
    if max(seed_res) > mp.mpf(10) ** (-ctx.digits // 3):
        raise SolverError("elliptic system disagrees with the period solution (branch error)",
                          residuals=tuple(float(r) for r in seed_res))
    p2, k2, mu2, res = _elliptic_polish(p, k, mu, Z, ctx)
    l1, l2, _, _ = elliptic_lambdas(k2, mu2, ctx)
    A0c = _A0_of(p2, k2, mp)
    agree = max(abs(l1 - lam1), abs(l2 - lam2), abs(A0c - A0))
    if agree > mp.mpf(10) ** (-ctx.digits // 3):
        raise SolverError("elliptic system and period route disagree", residuals=(float(agree),))
    if not (mp.re(p2) > 0 and abs(p2 - 1) > 0):
        raise ConstraintError("p outside the right half-plane", residuals=(float(mp.re(p2)),))
    if not (-1e-12 <= l2 < l1 and l1 + l2 < 2):
        raise ConstraintError("lambda pair outside the admissible region", residuals=(float(l1), float(l2)))
    _, b1 = periods_at(anchors, a0, ctx)
    return ChebotarevData(
        triple=triple,
        a0=a0,
        anchors=anchors,
        labels=order,
        weights=tuple(weights),
        lambda1=lam1,
        lambda2=lam2,
        p=p2,
        k=k2,
        mu=mu2,
        Z=Z,
        elliptic_residuals=tuple(res),
        ctx=ctx,
        betas=tuple(betas),
        beta1s=tuple(b1),
    )


# ---------------------------------------------------------------- arc tracing

def _field(anchors, a0):
    def rhs(s, u):
        z = complex(u[0], u[1])
        y = complex(u[2], u[3])
        v = 1j * y / abs(y)
        dlog = 1 / (z - anchors[0]) + 1 / (z - anchors[1]) + 1 / (z - anchors[2]) - 1 / (z - a0)
        dy = y / 2 * dlog * v
        return [v.real, v.imag, dy.real, dy.imag]

    return rhs


def _closest_event(target, radius):
    def hit(s, u):
        return abs(complex(u[0], u[1]) - target) - radius

    def closest(s, u):
        z = complex(u[0], u[1])
        y = complex(u[2], u[3])
        return ((z - target) * (1j * y / abs(y)).conjugate()).real

    hit.terminal = True
    hit.direction = -1
    closest.terminal = True
    closest.direction = 1
    return (hit, closest)


def _integrate(rhs, z0, y0, target, radius, L, diam):
    sol = solve_ivp(rhs, (0.0, L), [z0.real, z0.imag, y0.real, y0.imag], method="DOP853",
                    rtol=1e-13, atol=1e-15 * diam, events=_closest_event(target, radius),
                    dense_output=True)
    if sol.status != 1:
        raise TracingError(f"trajectory did not approach {target}: {sol.message}")
    miss = abs(complex(sol.y[0][-1], sol.y[1][-1]) - target)
    return sol, sol.t[-1], miss


def center_directions(anchors, a0):
    """The three directions in which critical trajectories leave a0."""
    P3 = (a0 - anchors[0]) * (a0 - anchors[1]) * (a0 - anchors[2])
    base = (math.pi + np.angle(P3)) / 3
    return [complex(math.cos(base + 2 * math.pi * m / 3), math.sin(base + 2 * math.pi * m / 3)) for m in range(3)]


def trace_arcs(triple_or_data, center=None, ctx: PrecisionCtx = None, n_samples: int = 801):
    """Trace the three critical trajectories joining the center to the anchors.

    Each arc is integrated inward from its anchor (unique trajectory at the
    simple pole) and outward from the center along the matching critical
    direction; the two halves are spliced at mid-length and must agree.
    """
    if isinstance(triple_or_data, ChebotarevData):
        anchors = [complex(a) for a in triple_or_data.anchors]
        center = complex(triple_or_data.a0)
    else:
        order = surface_order(triple_or_data.raw)
        anchors = [complex(triple_or_data.raw[j]) for j in order]
        center = complex(center)
    # integrate in coordinates centred at a0 with unit diameter; raw
    # coordinates far from the origin cost the step control dearly
    unit = max(abs(x - y) for x in anchors for y in anchors)
    shift = center
    anchors = [(a - shift) / unit for a in anchors]
    a0 = 0j
    diam = 1.0
    stop = 1e-6 * diam
    eps = 1e-7 * diam
    rhs = _field(anchors, a0)
    dirs = center_directions(anchors, a0)
    arcs = []
    for k in (1, 2, 3):
        ak = anchors[k - 1]
        others = [anchors[j] for j in range(3) if j != k - 1]
        # inward from a_k
        ck = (ak - a0) / ((ak - others[0]) * (ak - others[1]))
        e_in = -ck.conjugate() / abs(ck)
        z0 = ak + eps * e_in
        y0 = np.sqrt(eps * e_in * (z0 - others[0]) * (z0 - others[1]) / (z0 - a0))
        if ((1j * y0 / abs(y0)) * e_in.conjugate()).real < 0:
            y0 = -y0
        sol_in, S_in, miss_in = _integrate(rhs, z0, y0, a0, stop, 20 * diam, diam)
        if miss_in > 1e-3 * diam:
            raise TracingError(f"trajectory from anchor {k} misses the center by {miss_in:.3g}")
        # arrival direction read a little before the end: at a closest-approach
        # stop the offset from a0 is perpendicular to the path
        near = min(abs(a - a0) for a in anchors)
        back = sol_in.sol(max(S_in - 1e-3 * near, 0.0))
        z_back = complex(back[0], back[1]) - a0
        e_out = min(dirs, key=lambda d: abs(d - z_back / abs(z_back)))
        # outward from a0
        z1 = a0 + eps * e_out
        y1 = np.sqrt((z1 - anchors[0]) * (z1 - anchors[1]) * (z1 - anchors[2]) / (eps * e_out))
        if ((1j * y1 / abs(y1)) * e_out.conjugate()).real < 0:
            y1 = -y1
        sol_out, S_out, miss_out = _integrate(rhs, z1, y1, ak, stop, 20 * diam, diam)
        if miss_out > 1e-3 * diam:
            raise TracingError(f"trajectory from the center misses anchor {k} by {miss_out:.3g}")
        # common arclength from a0: outward s = σ - eps, inward s = L - σ - eps
        L = (2 * eps + S_in + miss_in + S_out + miss_out) / 2
        zm_out = sol_out.sol(L / 2 - eps)
        zm_in = sol_in.sol(L / 2 - eps)
        gap = abs(complex(zm_out[0], zm_out[1]) - complex(zm_in[0], zm_in[1]))
        if gap > 1e-6 * diam:
            raise TracingError(f"arc {k}: traces from both ends disagree by {gap:.3g} (inconsistent center)")
        u = np.linspace(0.0, 1.0, n_samples)
        sig = L * (1 - np.cos(np.pi * u)) / 2
        z = np.empty(n_samples, dtype=complex)
        tang = np.empty(n_samples, dtype=complex)
        for i, sg in enumerate(sig):
            if sg <= L / 2:
                st = sol_out.sol(min(max(sg - eps, 0.0), S_out))
                sgn = 1
            else:
                st = sol_in.sol(min(max(L - sg - eps, 0.0), S_in))
                sgn = -1
            z[i] = complex(st[0], st[1])
            y = complex(st[2], st[3])
            tang[i] = sgn * 1j * y / abs(y)
        z[0] = a0
        z[-1] = ak
        tang[0] = e_out
        tang[-1] = -e_in
        cum = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(z)))])
        t = cum / cum[-1]
        # tangent at a0 measured from the trace (Richardson on two small radii)
        s1, s2 = 1e-4 * near, 2e-4 * near
        p1, p2 = sol_out.sol(s1), sol_out.sol(s2)
        d1 = complex(p1[0], p1[1]) - a0
        d2 = complex(p2[0], p2[1]) - a0
        ang = np.angle(d1) - np.angle(d2 / d1)
        tan0 = complex(math.cos(ang), math.sin(ang))
        arcs.append(Arc(k, shift + unit * z, t, (tan0, -e_in), tangents=tang, splice_gap=gap * unit))
    return tuple(arcs)


# ---------------------------------------------------------------- capacity

def infinity_constant(data: ChebotarevData, star: Star = None):
    """lim (log φ_{a1}(z) - log z) at ∞ on sheet 1, i.e. -log(ξ·cp)."""
    star = star or data.star()
    vec, _ = star.integrals_inf()
    return vec[1] - data.a0 * vec[0]


def capacity(data: ChebotarevData, ctx: PrecisionCtx = None):
    const = infinity_constant(data)
    mp = data.ctx.mp
    cp = mp.exp(-mp.re(const))
    return cp


def with_capacity(data: ChebotarevData) -> ChebotarevData:
    mp = data.ctx.mp
    const = infinity_constant(data)
    cp = mp.exp(-mp.re(const))
    xi = mp.expj(-mp.im(const))
    return replace(data, capacity=cp, xi=xi)


def chebotarev(raw, ctx: PrecisionCtx) -> ChebotarevData:
    """Full pipeline: normalize, solve, trace, capacity."""
    tri = normalize_triple(raw)
    data = solve_center(tri, ctx)
    arcs = trace_arcs(data)
    data = replace(data, arcs=arcs)
    return with_capacity(data)
