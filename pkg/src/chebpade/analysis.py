"""Spurious-pole prediction versus Padé roots, error rates, and the orbit of v(n).

v(n) = n ω(Δ3) - (n ω(Δ2) + γ) β3/β2 taken modulo the lattice Z + (β3/β2)Z.
Its orbit is finite, a union of segments, or dense according to the
integer relations among the three arc masses.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .chebotarev import ChebotarevData
from .errors import ChebPadeError, InsufficientDataError
from .mpnum import PrecisionCtx
from .pade import (
    compute_moments,
    error_eval,
    pade_solve,
    pole_zero_extract,
    required_digits,
)
from .surface import SheetPoint
from .szego import BoundDensity, Density, solve_zn


def _c(x):
    x = complex(x)
    return [x.real, x.imag]


# ---------------------------------------------------------------- orbit

@dataclass
class OrbitReport:
    v_points: list
    classification: str
    relation: Optional[tuple] = None
    period: Optional[int] = None
    bound: int = 0
    discrepancy_curve: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "classification": self.classification,
            "relation": list(self.relation) if self.relation else None,
            "period": self.period,
            "bound": self.bound,
            "flags": self.flags,
            "discrepancy_curve": [[n, r] for n, r in self.discrepancy_curve],
            "n_points": len(self.v_points),
        }


def _ifloor(y) -> int:
    ctx = getattr(y, "context", None)
    return int(ctx.floor(y)) if ctx is not None else math.floor(y)


def _lll(basis, delta=Fraction(3, 4)):
    """LLL reduction of a few integer row vectors, exact rational Gram-Schmidt."""
    b = [[int(x) for x in row] for row in basis]
    n = len(b)

    def dot(u, v):
        return sum(x * y for x, y in zip(u, v))

    def gso():
        bs, mu = [], [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            v = [Fraction(x) for x in b[i]]
            for j in range(i):
                nj = dot(bs[j], bs[j])
                mu[i][j] = dot(b[i], bs[j]) / nj if nj else Fraction(0)
                v = [x - mu[i][j] * y for x, y in zip(v, bs[j])]
            bs.append(v)
        return bs, mu

    bs, mu = gso()
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                bs, mu = gso()
        if dot(bs[k], bs[k]) >= (delta - mu[k][k - 1] ** 2) * dot(bs[k - 1], bs[k - 1]):
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            bs, mu = gso()
            k = max(k - 1, 1)
    return b


def best_rational(x, bound: int, tol) -> Optional[Fraction]:
    """First continued-fraction convergent p/q of x with |x - p/q| < tol and q <= bound."""
    h0, h1, k0, k1 = 0, 1, 1, 0
    y = x
    for _ in range(200):
        a = _ifloor(y)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 > bound:
            return None
        if abs(x * k1 - h1) < tol * k1:
            return Fraction(h1, k1)
        frac = y - a
        if frac == 0:
            return None
        y = 1 / frac
    return None


def find_relation(w2, w3, bound: int, tol):
    """(m2, m3, k) with 0 < max|m| <= bound and |m2 w2 + m3 w3 - k| < tol, smallest found; else None.

    A relation n1 w1 + n2 w2 + n3 w3 in Z is the same as (n2 - n1) w2 + (n3 - n1) w3 in Z
    because the weights sum to 1.  Candidates are the LLL-reduced rows of the lattice spanned by
    (1, 0, K w2), (0, 1, K w3), (0, 0, K) with K ~ 1/tol, plus the one-weight relations from
    continued fractions.
    """
    K = 10 ** max(1, _ifloor(-math.log10(float(tol))) + 2)

    def scaled(x):
        return _ifloor(x * K + 0.5) if hasattr(x, "context") else _ifloor(Fraction(x) * K + Fraction(1, 2))

    cands = [tuple(r[:2]) for r in _lll([[1, 0, scaled(w2)], [0, 1, scaled(w3)], [0, 0, K]])]
    for idx, w in ((0, w2), (1, w3)):
        fr = best_rational(w, bound, tol)
        if fr is not None:
            cands.append((fr.denominator, 0) if idx == 0 else (0, fr.denominator))
    best = None
    for m2, m3 in cands:
        if (m2, m3) == (0, 0) or max(abs(m2), abs(m3)) > bound:
            continue
        x = m2 * w2 + m3 * w3
        k = _ifloor(x + 0.5)
        if abs(x - k) < tol and (best is None or abs(m2) + abs(m3) < abs(best[0]) + abs(best[1])):
            best = (m2, m3, k)
    return best


def _tau(periods):
    return complex(getattr(periods, "tau_ratio", periods))


def orbit_points(weights, gamma, periods, N: int, n0: int = 1):
    """v(n) = n w3 - (n w2 + γ)τ for n = n0..N, as lattice coordinates in [0, 1)^2."""
    tau = _tau(periods)
    w2, w3, g = float(weights[1]), float(weights[2]), complex(gamma)
    n = np.arange(n0, N + 1, dtype=float)
    v = n * w3 - (n * w2 + g) * tau
    y = v.imag / tau.imag
    x = v.real - y * tau.real
    return np.column_stack([x - np.floor(x), y - np.floor(y)])


def covering_radius(points, periods, grid: int = 120) -> float:
    """Largest distance from a grid point of the torus to the nearest orbit point."""
    tau = _tau(periods)
    pts = points[:, 0] + points[:, 1] * tau
    allp = np.concatenate([pts + dx + dy * tau for dx in (-1, 0, 1) for dy in (-1, 0, 1)])
    tree = cKDTree(np.column_stack([allp.real, allp.imag]))
    u = (np.arange(grid) + 0.5) / grid
    X, Y = np.meshgrid(u, u)
    q = (X + Y * tau).ravel()
    d, _ = tree.query(np.column_stack([q.real, q.imag]))
    return float(d.max())


def classify_orbit(weights, gamma, periods, N: int = 10000, tol_denom_bound: int = 10 ** 6,
                   tol=None) -> OrbitReport:
    """Finite, arcs or dense, from a bounded search for integer relations among the weights.

    ``tol`` defaults to 1e-8 for float weights and to 10^(-dps/2) for mpmath weights.  At
    bound B every pair of reals has a relation with residual about 1/B², so the bound is
    capped at 0.1/sqrt(tol) (and the cap flagged) to keep "no relation" meaningful.
    """
    if N < 100:
        raise ValueError("N must be at least 100")
    w = list(weights)
    if any(float(x) <= 0 for x in w) or abs(float(sum(w)) - 1) > 1e-8:
        raise ValueError("weights must be positive and sum to 1")
    if tol is None:
        ctx = getattr(w[1], "context", None)
        tol = ctx.mpf(10) ** (-(ctx.dps // 2)) if ctx is not None else 1e-8
    pts = orbit_points(w, gamma, periods, N)
    curve = [(m, covering_radius(pts[:m], periods))
             for m in (100, 300, 1000, 3000, 10000, 30000, 100000) if m <= N]
    flags = [f"bound {tol_denom_bound}, residual tolerance {float(tol):.1e}"]
    decidable = int(0.1 / math.sqrt(float(tol)))
    if decidable < tol_denom_bound:
        flags.append(f"bound reduced to {decidable}: larger relations are indistinguishable from noise")
        tol_denom_bound = decidable
    r2 = best_rational(w[1], tol_denom_bound, tol)
    r3 = best_rational(w[2], tol_denom_bound, tol)
    if r2 is not None and r3 is not None:
        r1 = 1 - r2 - r3
        period = math.lcm(r1.denominator, r2.denominator, r3.denominator)
        return OrbitReport(pts.tolist(), "finite", (0, r2.denominator, 0), period, tol_denom_bound, curve,
                           flags + [f"weights {r1}, {r2}, {r3}"])
    rel = find_relation(w[1], w[2], tol_denom_bound, tol)
    if rel is not None:
        m2, m3, _ = rel
        return OrbitReport(pts.tolist(), "arcs", (0, m2, m3), None, tol_denom_bound, curve, flags)
    return OrbitReport(pts.tolist(), "dense", None, None, tol_denom_bound, curve,
                       flags + [f"no relation up to bound {tol_denom_bound}"])


def write_orbit_csv(report: OrbitReport, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["n", "x", "y"])
        for i, (x, y) in enumerate(report.v_points):
            wr.writerow([i + 1, x, y])


# ---------------------------------------------------------------- spurious poles

@dataclass
class SpuriousRecord:
    n: int
    zn: SheetPoint
    sheet: int
    degree: int
    extra_root: Optional[complex] = None
    distance: Optional[float] = None
    far_roots: int = 0
    separation: float = 0.0
    same_as_previous: Optional[bool] = None
    error: Optional[str] = None

    def to_json(self) -> dict:
        zn = None if self.zn is None else ("inf" if self.zn.is_inf else _c(self.zn.z))
        return {
            "n": self.n,
            "zn": zn,
            "sheet": self.sheet,
            "degree": self.degree,
            "extra_root": None if self.extra_root is None else _c(self.extra_root),
            "distance": self.distance,
            "far_roots": self.far_roots,
            "separation": self.separation,
            "same_as_previous": self.same_as_previous,
            "error": self.error,
        }


@dataclass
class SpuriousReport:
    records: list = field(default_factory=list)
    rate_checks: list = field(default_factory=list)

    def sheet1(self):
        return [r for r in self.records if r.sheet == 1 and r.distance is not None]

    def trend(self) -> Optional[float]:
        """Least-squares slope of log10(distance) over the sheet-1 records."""
        s1 = self.sheet1()
        if len(s1) < 2:
            return None
        x = np.array([r.n for r in s1], dtype=float)
        y = np.log10([max(r.distance, 1e-300) for r in s1])
        return float(np.polyfit(x, y, 1)[0])

    def to_json(self) -> dict:
        return {
            "records": [r.to_json() for r in self.records],
            "trend": self.trend(),
            "rate_checks": [{"z": _c(z), "measured": m, "predicted": p} for z, m, p in self.rate_checks],
        }


def separation_radius(dists, n: int, diam: float) -> float:
    """5 x the largest distance to Δ among the n-1 nearest roots, at least 0.05 diam."""
    d = sorted(dists)[: max(n - 1, 0)]
    return max(5 * max(d, default=0.0), 0.05 * diam)


def _bound_at(h, data, digits):
    """The density bound to a continuum of at least ``digits`` digits."""
    from .chebotarev import chebotarev

    if isinstance(h, BoundDensity):
        dens = h.density
    else:
        dens = h or Density()
    if data.ctx.digits < digits:
        data = chebotarev(data.triple.raw, PrecisionCtx(digits))
    return dens.bind(data), data


def spurious_compare(h, data: ChebotarevData, n_range, ctx: PrecisionCtx = None) -> SpuriousReport:
    """Predicted spurious pole π(ẑ_n) against the roots of q_n for each n in n_range."""
    n_range = list(n_range)
    digits = max(required_digits(max(n_range)), (ctx or data.ctx).digits)
    bd, data = _bound_at(h, data, digits)
    st = bd.surf.star
    mom = compute_moments(bd, 2 * max(n_range) + 2, data)
    report = SpuriousReport()
    prev = {}
    for n in n_range:
        try:
            sol = solve_zn(n, bd, data)
            ap = pade_solve(mom, n, retry=False)
            poles, _ = pole_zero_extract(ap)
        except ChebPadeError as exc:
            report.records.append(SpuriousRecord(n, None, 0, 0, error=str(exc)))
            continue
        prev[n] = ap
        roots = [r for r, m in poles for _ in range(m)]
        dists = [st.dist_to_delta(complex(r)) for r in roots]
        sep = separation_radius(dists, n, st.diam)
        far = [r for r, d in zip(roots, dists) if d > sep]
        zn = sol.zn
        rec = SpuriousRecord(n, zn, zn.sheet, ap.degree, far_roots=len(far), separation=sep)
        if ap.defect > 0 and (n - 1) in prev:
            q0 = prev[n - 1].q_coeffs
            rec.same_as_previous = len(q0) == len(ap.q_coeffs) and all(
                abs(complex(a) - complex(b)) < 1e-10 * (1 + abs(complex(b))) for a, b in zip(q0, ap.q_coeffs))
        if len(far) == 1 and ap.degree == n:
            rec.extra_root = complex(far[0])
            if zn.sheet == 1 and not zn.is_inf:
                rec.distance = float(abs(far[0] - zn.z))
        report.records.append(rec)
    return report


def write_distance_csv(report: SpuriousReport, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["n", "sheet", "re_zn", "im_zn", "re_root", "im_root", "distance", "far_roots"])
        for r in report.records:
            zn = complex(r.zn.z) if r.zn is not None and not r.zn.is_inf else complex("nan")
            er = r.extra_root if r.extra_root is not None else complex("nan")
            wr.writerow([r.n, r.sheet, zn.real, zn.imag, er.real, er.imag,
                         "" if r.distance is None else r.distance, r.far_roots])


# ---------------------------------------------------------------- rates

def rate_check(h, data: ChebotarevData, z_list, n_range, ctx: PrecisionCtx = None):
    """[(z, measured, predicted)]: exp(slope of log|f - π_n| in n) against |Φ(z)|^(-2)."""
    n_range = list(n_range)
    digits = max(required_digits(max(n_range)), (ctx or data.ctx).digits)
    bd, data = _bound_at(h, data, digits)
    surf = bd.surf
    mp = surf.mp
    mom = compute_moments(bd, 2 * max(n_range) + 2, data)
    approx = {n: pade_solve(mom, n, retry=False) for n in n_range}
    out = []
    for z in z_list:
        z = mp.mpc(z)
        ns, logs = [], []
        for n in n_range:
            try:
                e = error_eval(approx[n], bd, z)
            except ChebPadeError:
                continue
            if e == 0:
                continue
            ns.append(n)
            logs.append(float(mp.log(abs(e))))
        if len(ns) < 4:
            raise InsufficientDataError(f"only {len(ns)} usable orders at z = {complex(z)}")
        slope = float(np.polyfit(np.array(ns, dtype=float), np.array(logs), 1)[0])
        predicted = float(abs(surf.green(SheetPoint(z, 1))) ** -2)
        out.append((complex(z), math.exp(slope), predicted))
    return out


def write_report_json(report, path, config: dict = None) -> None:
    payload = report.to_json()
    if config is not None:
        payload = {"config": config, **payload}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
