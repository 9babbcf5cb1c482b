"""Acceptance checks, runnable at full or reduced scale.

Each ``check_*`` returns a :class:`Check`; :func:`run_all` runs the ten in
order.  The CLI ``verify`` command uses ``scale="reduced"``; the test suite
runs ``scale="full"``.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field

import numpy as np

from .analysis import classify_orbit, rate_check, spurious_compare
from .chebotarev import chebotarev, elliptic_lambdas
from .mpnum import PrecisionCtx
from .pade import cauchy_value, compute_moments, error_eval, pade_solve, required_digits
from .surface import INF1, INF2, SheetPoint, lattice_distance, surface_for
from .szego import Density, build_Sn, solve_zn

GENERIC = (0, 1j, 0.4 + 0.3j)
# h = 1/p with p = (t - 2)(t + 1.5)(t - 2.5i)
CUBIC = "recip-poly:7.5i,-3+1.25i,-0.5-2.5i,1"


@dataclass
class Check:
    index: int
    name: str
    ok: bool
    detail: str
    seconds: float
    values: dict = field(default_factory=dict, repr=False)

    def line(self) -> str:
        return f"C{self.index:<2d} {'PASS' if self.ok else 'FAIL'}  {self.name}: {self.detail} ({self.seconds:.1f}s)"


def equilateral(ctx: PrecisionCtx):
    """The cube roots of unity at (well beyond) the working precision."""
    hi = PrecisionCtx(max(4 * ctx.digits, 200)).mp
    return (hi.mpc(1), hi.expjpi(hi.mpf(2) / 3), hi.expjpi(-hi.mpf(2) / 3))


def random_triples(count: int, seed: int = 0):
    """Triples in the unit square with every angle at least 20 degrees."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        pts = [complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(3)]
        ok = True
        for i in range(3):
            u, v = pts[(i + 1) % 3] - pts[i], pts[(i + 2) % 3] - pts[i]
            if abs(u) < 0.2 or abs(math.degrees(math.atan2((u.conjugate() * v).imag, (u.conjugate() * v).real))) < 20:
                ok = False
        if ok:
            out.append(tuple(pts))
    return out


def _timed(index, name, fn):
    t = time.time()
    ok, detail, values = fn()
    return Check(index, name, ok, detail, time.time() - t, values)


def _seg_dist(z, a, b):
    d = b - a
    s = min(1.0, max(0.0, ((z - a) * d.conjugate()).real / abs(d) ** 2))
    return abs(z - (a + s * d))


def check_symmetry(digits: int = 60):
    def run():
        ctx = PrecisionCtx(digits)
        t = time.time()
        d = chebotarev(equilateral(ctx), ctx)
        elapsed = time.time() - t
        a0 = abs(complex(d.a0))
        werr = max(abs(float(w) - 1 / 3) for w in d.weights)
        straight = max(
            max(_seg_dist(z, complex(d.a0), complex(d.anchors[arc.index - 1])) for z in arc.samples)
            for arc in d.arcs)
        ok = a0 < 1e-8 and werr < 1e-8 and straight < 1e-6 and elapsed < 60
        detail = f"|a0| {a0:.1e}, weight err {werr:.1e}, arc deviation {straight:.1e}, {elapsed:.1f}s"
        return ok, detail, {"a0": d.a0, "weights": d.weights}

    return _timed(1, "symmetry oracle", run)


def check_periods(count: int = 10, digits: int = 40, seed: int = 0):
    def run():
        ctx = PrecisionCtx(digits)
        worst = {"sum_beta": 0.0, "sum_beta1": 0.0, "omega_vs_elliptic": 0.0}
        im_tau = math.inf
        betas = []
        for raw in random_triples(count, seed):
            d = chebotarev(raw, ctx)
            P = surface_for(d).periods
            mp = ctx.mp
            worst["sum_beta"] = max(worst["sum_beta"], float(abs(sum(P.beta))))
            worst["sum_beta1"] = max(worst["sum_beta1"], float(abs(sum(P.beta1) + 1)))
            im_tau = min(im_tau, float(mp.im(P.tau_ratio)))
            omega = [d.a0 * b - b1 for b, b1 in zip(P.beta, P.beta1)]
            # weights from the elliptic unknowns, mapped back to surface labels
            l1, l2, _, _ = elliptic_lambdas(d.k, d.mu, ctx)
            raw_w = {d.triple.perm[0]: 1 - l1, d.triple.perm[1]: (l1 + l2) / 2, d.triple.perm[2]: (l1 - l2) / 2}
            ref = [raw_w[lab] for lab in d.labels]
            worst["omega_vs_elliptic"] = max(worst["omega_vs_elliptic"], max(float(abs(o - c)) for o, c in zip(omega, ref)))
            betas.append(P.beta)
        ok = worst["sum_beta"] < 1e-10 and worst["sum_beta1"] < 1e-10 and im_tau > 0 and worst["omega_vs_elliptic"] < 1e-6
        detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f", min Im tau {im_tau:.3f}"
        return ok, detail, {"betas": betas}

    return _timed(2, "period identities", run)


def laurent_inverse_w(points, count: int, mp):
    """Coefficients c_1..c_count of 1/w = Σ c_k z^(-k) for w² = ∏(z - p), from the binomial series."""
    # 1/w = z^(-2) ∏ (1 - p/z)^(-1/2)
    series = [mp.mpc(1)] + [mp.mpc(0)] * count
    for p in points:
        factor = [mp.mpc(1)]
        for j in range(1, count + 1):
            factor.append(factor[-1] * (j - mp.mpf(1) / 2) / j * p)
        series = [sum(series[i] * factor[m - i] for i in range(m + 1)) for m in range(count + 1)]
    return ([mp.mpc(0)] + series)[:count]


def check_moments(digits: int = 40, raw=GENERIC):
    def run():
        ctx = PrecisionCtx(digits)
        d = chebotarev(raw, ctx)
        bd = Density().bind(d)
        mp = bd.mp
        mom = compute_moments(bd, 8, d)
        pts = [d.a0] + list(d.anchors)
        ref = laurent_inverse_w(pts, 8, mp)
        coef_err = max(float(abs(mom.f(k) - ref[k - 1])) for k in range(1, 9))
        f123 = [mom.f(1), mom.f(2), mom.f(3)]
        A = sum(pts) / 2
        head_err = max(float(abs(f123[0])), float(abs(f123[1] - 1)), float(abs(f123[2] - A)))
        st = bd.surf.star
        point_err = 0.0
        for k in range(5):
            z = mp.mpc(st.c + 1.3 * st.r_T * np.exp(2j * np.pi * k / 5 + 0.3))
            val = cauchy_value(bd, z)
            point_err = max(point_err, float(abs(val - 1 / bd.surf.w(SheetPoint(z, 1)))))
        ok = head_err < 1e-10 and coef_err < 1e-10 and point_err < 1e-8
        detail = f"f1..f3 err {head_err:.1e}, Laurent f1..f8 err {coef_err:.1e}, 1/w pointwise {point_err:.1e}"
        return ok, detail, {"moments": mom.coeffs}

    return _timed(3, "Cauchy transform series", run)


def bs_grid(d, count: int, seed: int = 1):
    st = d.star()
    rng = random.Random(seed)
    pts = []
    while len(pts) < count:
        z = st.c + 2 * st.r_T * complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        if st.dist_to_delta(z) > 0.02 * st.diam:
            pts.append(z)
    return pts


def check_bernstein_szego(digits: int = 100, n_range=range(5, 16), grid: int = 100,
                          density: str = CUBIC, raw=GENERIC):
    def run():
        t0 = time.time()
        ctx = PrecisionCtx(digits)
        d = chebotarev(raw, ctx)
        dens = Density.parse(density)
        bd = dens.bind(d)
        mp = bd.mp
        coeffs = [mp.mpc(c) for c in dens.poly_coeffs]
        p = lambda z: sum(c * z ** j for j, c in enumerate(coeffs))
        mom = compute_moments(bd, 2 * max(n_range) + 2, d)
        pts = [mp.mpc(z) for z in bs_grid(d, grid)]
        wq = we = 0.0
        for n in n_range:
            if 2 * n <= dens.degree + 2:
                continue
            ap = pade_solve(mom, n)
            sd = build_Sn(n, bd, 3, d)
            for z in pts:
                s1, s2 = sd.Sn_sheet1(z), sd.Sn_sheet2(z)
                den = s1 + p(z) * s2
                qz = ap.q(z)
                wq = max(wq, float(abs(den - qz) / abs(qz)))
                e = error_eval(ap, bd, z)
                pred = 2 / bd.surf.w(SheetPoint(z, 1)) * s2 / den
                we = max(we, float(abs(pred - e) / abs(e)))
        elapsed = time.time() - t0
        ok = wq < 1e-5 and we < 1e-5 and elapsed < 600
        detail = f"q_n rel err {wq:.1e}, error formula rel err {we:.1e}, {len(pts)} points, {elapsed:.0f}s"
        return ok, detail, {}

    return _timed(4, "Bernstein-Szego exactness", run)


def check_inversion(digits: int = 40, targets: int = 50, n_max: int = 100, raw=GENERIC, seed: int = 2):
    def run():
        ctx = PrecisionCtx(digits)
        d = chebotarev(raw, ctx)
        surf = surface_for(d)
        mp = surf.mp
        tau = surf.periods.tau_ratio
        rng = random.Random(seed)
        worst_rt = 0.0
        found = []
        for _ in range(targets):
            tgt = mp.mpf(rng.random()) + mp.mpf(rng.random()) * tau
            pt = surf.invert(tgt)
            worst_rt = max(worst_rt, lattice_distance(complex(surf.abel(pt) - tgt), complex(tau)))
            found.append(pt)
        bd = Density().bind(d)
        worst_zn = 0.0
        for n in range(1, n_max + 1):
            worst_zn = max(worst_zn, solve_zn(n, bd, d).residual)
        ok = worst_rt < 1e-10 and worst_zn < 1e-10
        detail = f"round trip {worst_rt:.1e} on {targets} targets, ẑ_n residual {worst_zn:.1e} for n <= {n_max}"
        return ok, detail, {"points": found}

    return _timed(5, "Jacobi inversion", run)


def check_rate(n_range=range(10, 31), points=(5 + 5j, -4 + 2j, -1 - 1j), raw=GENERIC):
    def run():
        d = chebotarev(raw, PrecisionCtx(40))
        rows = rate_check(Density(), d, list(points), n_range)
        worst = max(abs(m / p - 1) for _, m, p in rows)
        detail = ", ".join(f"z={complex(z):.3g}: {m / p - 1:+.2%}" for z, m, p in rows)
        return worst < 0.02, detail, {"rows": rows}

    return _timed(6, "rate check", run)


def sheet1_subsequence(report, star):
    """Records whose ẑ_n is a finite sheet-1 point outside the separation radius."""
    out = []
    for r in report.records:
        if r.zn is None or r.zn.is_inf or r.zn.sheet != 1:
            continue
        if star.dist_to_delta(complex(r.zn.z)) > r.separation:
            out.append(r)
    return out


def check_spurious(n_range=range(2, 31), raw=GENERIC):
    def run():
        d = chebotarev(raw, PrecisionCtx(40))
        rep = spurious_compare(Density(), d, n_range)
        st = d.star()
        sub = sheet1_subsequence(rep, st)
        sheet2 = [r for r in rep.records if r.sheet == 2]
        far2 = sum(r.far_roots for r in sheet2)
        dist = [r.distance for r in sub]
        if len(sub) < 2 or any(x is None for x in dist):
            return False, f"sheet-1 subsequence unusable: {[r.n for r in sub]}", {}
        x = np.array([r.n for r in sub], dtype=float)
        y = np.log10([max(v, 1e-300) for v in dist])
        slope = float(np.polyfit(x, y, 1)[0])
        last = dist[-1]
        ok = last < 1e-3 and slope < 0 and far2 == 0
        detail = (f"sheet-1 n={[r.n for r in sub]}, last distance {last:.1e}, log10 slope {slope:.2f}; "
                  f"far roots over {len(sheet2)} sheet-2 orders: {far2}")
        return ok, detail, {"report": rep}

    return _timed(7, "spurious pole localization", run)


def check_orbit(N: int = 10000, digits: int = 60, seed: int = 3):
    def run():
        ctx = PrecisionCtx(digits)
        mp = ctx.mp
        tau = mp.expjpi(mp.mpf(1) / 3)
        third = mp.mpf(1) / 3
        r1 = classify_orbit([mp.mpf(1) / 2, third, mp.mpf(1) / 6], 0, tau, N=1000)
        s = mp.sqrt(2) / 4
        r2 = classify_orbit([mp.mpf(1) / 2, s, mp.mpf(1) / 2 - s], 0, tau, N=1000)
        raw = random_triples(1, seed)[0]
        d = chebotarev(raw, ctx)
        surf = surface_for(d)
        P = surf.periods
        w = [mp.re(o / (2j * mp.pi)) for o in P.omega]
        gamma = Density().bind(d).gamma
        r3 = classify_orbit(w, gamma, P.tau_ratio, N=N)
        curve = dict(r3.discrepancy_curve)
        ratio = curve[N] / curve[100]
        ok = (r1.classification == "finite" and r1.period == 6 and r2.classification == "arcs"
              and r3.classification == "dense" and ratio < 0.5)
        detail = (f"rational: {r1.classification} period {r1.period}; dependent: {r2.classification} "
                  f"{r2.relation}; random: {r3.classification}, radius ratio {ratio:.3f}")
        return ok, detail, {"reports": (r1, r2, r3)}

    return _timed(8, "orbit trichotomy", run)


def check_surface(digits: int = 40, count: int = 10, raw=GENERIC, seed: int = 4):
    def run():
        t0 = time.time()
        ctx = PrecisionCtx(digits)
        d = chebotarev(raw, ctx)
        S = surface_for(d)
        mp = S.mp
        P = S.periods
        st = S.star
        rng = random.Random(seed)

        def rand_pt(sheet=None):
            while True:
                z = st.c + 1.5 * st.r_T * complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
                if st.dist_to_delta(z) > 0.02 * st.diam:
                    return SheetPoint(mp.mpc(z), sheet or rng.choice((1, 2)))

        err = {"linear_factor": 0.0, "reciprocity": 0.0, "riemann": 0.0, "green": 0.0, "trace": 0.0}
        a1 = SheetPoint(st.a[1], 1)
        Cstar = P.xi_a1 * P.capacity * mp.exp(-P.omega[1] * S.abel(INF1))
        for _ in range(count):
            p = rand_pt()
            E = Cstar * mp.exp(2 * S.third_kind_between(a1, INF2, p) - P.omega[1] * S.abel(p)) / S.green(p)
            err["linear_factor"] = max(err["linear_factor"], float(abs(E / (p.z - st.a[1]) - 1)))
            q = rand_pt(1)
            g = S.green(q) * S.green(q.conj())
            err["green"] = max(err["green"], float(abs(g - 1)))
            b1, b2 = rand_pt(), rand_pt()
            lhs = S.a_period(b1, 3) - S.a_period(b2, 3)
            rhs = -2j * mp.pi * (S.abel(b2) - S.abel(b1))
            err["riemann"] = max(err["riemann"], float(abs(lhs - rhs)))
            b3, b4 = rand_pt(), rand_pt()

            def I(p_, q_, x, y):
                return S.third_kind_between(x, p_, q_) - S.third_kind_between(y, p_, q_)

            r = (I(b1, b2, b3, b4) - I(b3, b4, b1, b2)) / (2j * mp.pi)
            err["reciprocity"] = max(err["reciprocity"], float(abs(r - mp.nint(mp.re(r)))))
            k = rng.choice((1, 2, 3))
            t = rng.uniform(0.05, 0.95)
            err["trace"] = max(err["trace"], float(abs(S.trace(k, t, "+") + S.trace(k, t, "-"))))
        elapsed = time.time() - t0
        ok = max(err.values()) < 1e-6 and elapsed < 300
        detail = ", ".join(f"{k} {v:.1e}" for k, v in err.items()) + f", {elapsed:.0f}s"
        return ok, detail, {}

    return _timed(9, "surface identities", run)


def _quantities(digits: int, reduced: bool):
    """The numbers criteria 1-5 report, at the given precision."""
    ctx = PrecisionCtx(digits)
    out = {}
    d = chebotarev(equilateral(ctx), ctx)
    out["c1_center"] = [d.a0]
    out["c1_weights"] = list(d.weights)
    for i, raw in enumerate(random_triples(2 if reduced else 4, 0)):
        P = surface_for(chebotarev(raw, ctx)).periods
        out[f"c2_beta_{i}"] = list(P.beta) + list(P.beta1)
    g = chebotarev(GENERIC, ctx)
    bd = Density().bind(g)
    out["c3_moments"] = compute_moments(bd, 8, g).coeffs
    bdp = Density.parse("recip-poly:3,1").bind(g)
    n = 5
    need = required_digits(n)
    mom = compute_moments(bdp, 2 * n + 2, g) if digits >= need else None
    if mom is not None:
        out["c4_q"] = pade_solve(mom, n).q_coeffs
    surf = surface_for(g)
    pts = []
    for tgt in (mp_frac(surf, 0.3, 0.6), mp_frac(surf, 0.7, 0.2)):
        pt = surf.invert(tgt)
        pts.append(pt.z if not pt.is_inf else 0)
    out["c5_points"] = pts
    zns = [solve_zn(k, bd, g).zn for k in (2, 3, 5)]
    out["c5_zn"] = [zn.z for zn in zns if not zn.is_inf]
    return out


def mp_frac(surf, x, y):
    mp = surf.mp
    return mp.mpf(x) + mp.mpf(y) * surf.periods.tau_ratio


def check_precision(digits: int = 50, reduced: bool = False):
    def run():
        guard = PrecisionCtx(digits).guard
        lo = _quantities(digits, reduced)
        hi = _quantities(2 * digits, reduced)
        tol = 10.0 ** (-digits / 2 + guard)
        worst, where = 0.0, ""
        for key, vals in lo.items():
            if key not in hi:
                continue
            for a, b in zip(vals, hi[key]):
                diff = float(abs(complex(a) - complex(b)))
                if diff > worst:
                    worst, where = diff, key
        ok = worst <= tol
        return ok, f"max change {worst:.1e} ({where}) against tolerance {tol:.0e}", {}

    return _timed(10, "precision robustness", run)


def run_all(scale: str = "full", only=None, echo=None, seed: int = 0):
    """All ten checks in order; ``only`` restricts to a set of indices, ``seed`` shifts every random draw."""
    reduced = scale == "reduced"
    plan = {
        1: lambda: check_symmetry(60),
        2: lambda: check_periods(3 if reduced else 10, 40, seed=seed),
        3: lambda: check_moments(40),
        4: lambda: (check_bernstein_szego(50, range(5, 7), 10) if reduced else check_bernstein_szego()),
        5: lambda: (check_inversion(40, 10, 20, seed=2 + seed) if reduced else check_inversion(seed=2 + seed)),
        6: lambda: check_rate(),
        7: lambda: (check_spurious(range(2, 20)) if reduced else check_spurious()),
        8: lambda: check_orbit(seed=3 + seed),
        9: lambda: check_surface(40, 4 if reduced else 10, seed=4 + seed),
        10: lambda: check_precision(50, reduced),
    }
    out = []
    for i, fn in plan.items():
        if only and i not in only:
            continue
        c = fn()
        if echo:
            echo(c.line())
        out.append(c)
    return out
