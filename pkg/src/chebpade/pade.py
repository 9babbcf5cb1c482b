"""Moments of f_h, diagonal Padé approximants and their roots.

f_h(z) = (1/πi) ∫_Δ h(t) dt / ((t - z) w+(t)) = Σ f_k z^(-k).  The
denominator q_n is the monic minimal-degree element of the kernel of the
n x (n+1) Hankel matrix [f_(j+m)], found by Gram-Schmidt on its columns
taken in order of increasing degree.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .chebotarev import ChebotarevData, chebotarev
from .errors import ConsistencyError, PoleError, PrecisionError
from .mpnum import PrecisionCtx


@dataclass
class MomentSeries:
    """f_1..f_N of f_h at the precision of the continuum they came from."""

    coeffs: list
    density: object = field(repr=False)
    digits: int = 30

    @property
    def N(self) -> int:
        return len(self.coeffs)

    def f(self, k: int):
        """f_k with f_k = 0 for k <= 0."""
        return self.coeffs[k - 1] if k >= 1 else 0


@dataclass
class PadeApproximant:
    """π_n = p_n/q_n with q_n monic of minimal degree; coefficients in increasing powers."""

    n: int
    p_coeffs: list
    q_coeffs: list
    digits: int
    residual: float = 0.0
    poles: list = field(default_factory=list)
    zeros: list = field(default_factory=list)

    @property
    def degree(self) -> int:
        return len(self.q_coeffs) - 1

    @property
    def defect(self) -> int:
        return self.n - self.degree

    def q(self, z):
        return _horner(self.q_coeffs, z)

    def p(self, z):
        return _horner(self.p_coeffs, z) if self.p_coeffs else 0

    def __call__(self, z):
        return self.p(z) / self.q(z)

    def to_json(self) -> dict:
        def c(x):
            x = complex(x)
            return [x.real, x.imag]

        return {
            "n": self.n,
            "defect": self.defect,
            "digits": self.digits,
            "p": [c(x) for x in self.p_coeffs],
            "q": [c(x) for x in self.q_coeffs],
            "poles": [[c(r), m] for r, m in self.poles],
            "zeros": [[c(r), m] for r, m in self.zeros],
        }


def _horner(coeffs, z):
    out = 0
    for c in reversed(coeffs):
        out = out * z + c
    return out


def required_digits(n: int) -> int:
    """Working precision for the order-n Hankel solve."""
    return max(50, 4 * n)


# ---------------------------------------------------------------- moments

def _bound(h, data, ctx):
    from .szego import BoundDensity, Density

    if isinstance(h, BoundDensity):
        return h
    if h is None:
        h = Density()
    return h.bind(data, 3, ctx)


def compute_moments(h, N: int, data: ChebotarevData, ctx: PrecisionCtx = None) -> MomentSeries:
    """f_(k+1) = -(1/πi) ∫_Δ t^k h(t) dt / w+(t) for k = 0..N-1."""
    if N < 1:
        raise ValueError("N must be at least 1")
    bd = _bound(h, data, ctx)
    mp = bd.mp
    st = bd.surf.star
    acc = [mp.mpc(0)] * N
    for k in (1, 2, 3):
        ts, vs, _ = st.chord_nodes(k)
        for t, v in zip(ts, vs):
            x = bd.h(t) * v
            for j in range(N):
                acc[j] += x
                x *= t
    scale = -1 / (mp.pi * 1j)
    return MomentSeries([a * scale for a in acc], bd, bd.surf.ctx.digits)


def cauchy_value(bd, z):
    """f_h(z) by quadrature, z off Δ."""
    return _cauchy_poly(bd, z, None)


def _cauchy_poly(bd, z, q):
    """(1/πi) ∫_Δ q(t) h(t) dt / ((t - z) w+(t)); q = None means q ≡ 1."""
    from .szego import _check_off_delta

    mp = bd.mp
    st = bd.surf.star
    z = mp.mpc(z)
    _check_off_delta(st, z)
    acc = mp.mpc(0)
    for k in (1, 2, 3):
        ts, vs, _, hs = bd.node_values(k, z, "h")
        for t, v, hv in zip(ts, vs, hs):
            g = hv if q is None else hv * _horner(q, t)
            acc += g * v / (t - z)
        if st.in_lens(complex(z), k):
            g = bd.h(z) if q is None else bd.h(z) * _horner(q, z)
            acc -= 2j * mp.pi * g / st.w_star(z)
    return acc / (mp.pi * 1j)


# ---------------------------------------------------------------- Hankel solve

def _first_dependency(cols, thresh, mp):
    """Smallest d with column d in the span of columns 0..d-1; returns (d, coefficients)."""
    Q = []
    R = []
    for d, col in enumerate(cols):
        v = list(col)
        norm0 = mp.sqrt(sum(abs(x) ** 2 for x in v))
        r = []
        for _pass in range(2):
            for i, qv in enumerate(Q):
                proj = sum(mp.conj(a) * b for a, b in zip(qv, v))
                if _pass == 0:
                    r.append(proj)
                else:
                    r[i] += proj
                v = [b - proj * a for a, b in zip(qv, v)]
        nv = mp.sqrt(sum(abs(x) ** 2 for x in v))
        if norm0 == 0 or nv <= thresh * norm0:
            # back substitution: R x = r, column d = Σ x_i col_i
            x = [mp.mpc(0)] * d
            for i in reversed(range(d)):
                s = r[i] - sum(R[i][j] * x[j] for j in range(i + 1, d))
                x[i] = s / R[i][i]
            return d, x
        Q.append([b / nv for b in v])
        r.append(nv)
        for i in range(len(R)):
            R[i].append(r[i])
        R.append([mp.mpc(0)] * d + [nv])
    return None, None


def pade_solve(moments: MomentSeries, n: int, ctx: PrecisionCtx = None, retry: bool = True) -> PadeApproximant:
    """The [n-1/n] approximant (deg p < deg q <= n) of the series Σ f_k z^(-k)."""
    if n < 1:
        raise ValueError("n must be positive")
    if moments.N < 2 * n:
        raise ValueError(f"need at least 2n = {2 * n} moments, got {moments.N}")
    need = required_digits(n)
    if moments.digits < need:
        if retry and moments.density is not None:
            return pade_solve(_recompute(moments, need), n, retry=False)
        raise PrecisionError(f"order {n} needs {need} digits, moments carry {moments.digits}")
    pctx = PrecisionCtx(moments.digits)
    mp = pctx.mp
    guard = pctx.guard
    thresh = mp.mpf(10) ** (-moments.digits + 2 * guard)
    f = [mp.mpc(moments.f(k)) for k in range(0, 2 * n + 1)]
    cols = [[f[j + m] if j + m <= 2 * n else mp.mpc(0) for m in range(1, n + 1)] for j in range(n + 1)]
    d, x = _first_dependency(cols, thresh, mp)
    if d is None:
        raise ConsistencyError("Hankel matrix has n+1 independent columns, impossible for n rows")
    if d == 0:
        raise ConsistencyError("all pivots collapsed: every moment vanishes")
    q = [-xi for xi in x] + [mp.mpc(1)]
    p = [sum(q[j] * f[j - i] for j in range(i + 1, d + 1)) for i in range(d)]
    res = _contact_residual(q, f, n, mp)
    tol = 10.0 ** (-moments.digits / 2)
    if res > tol:
        if retry and moments.density is not None:
            return pade_solve(_recompute(moments, 2 * moments.digits), n, retry=False)
        raise PrecisionError(f"contact residual {res:.2e} above {tol:.1e} at {moments.digits} digits")
    return PadeApproximant(n, p, q, moments.digits, res)


def _contact_residual(q, f, n, mp) -> float:
    """max over m = 1..n of |Σ q_j f_(j+m)|, relative to max|q_j| · max|f_k|."""
    scale = max(abs(c) for c in q) * max(abs(x) for x in f)
    if scale == 0:
        return 0.0
    worst = 0.0
    for m in range(1, n + 1):
        s = sum(q[j] * f[j + m] for j in range(len(q)) if j + m < len(f))
        worst = max(worst, float(abs(s) / scale))
    return worst


def _recompute(moments: MomentSeries, digits: int) -> MomentSeries:
    from .szego import Density

    bd = moments.density
    data = bd.surf.data
    ctx = PrecisionCtx(digits)
    hi = chebotarev(data.triple.raw, ctx)
    dens = Density(bd.density.kind, bd.density.poly_coeffs, bd.density.name)
    return compute_moments(dens, moments.N, hi, ctx)


def orthogonality_residual(approx: PadeApproximant, h, data: ChebotarevData = None) -> float:
    """max_k |∫ t^k q_n h dt/w+| / ∫ |t^k q_n h dt/w+| for k < deg q_n, by direct quadrature."""
    bd = _bound(h, data, None)
    mp = bd.mp
    st = bd.surf.star
    q = [mp.mpc(c) for c in approx.q_coeffs]
    d = len(q) - 1
    num = [mp.mpc(0)] * d
    den = [mp.mpf(0)] * d
    for k in (1, 2, 3):
        ts, vs, _ = st.chord_nodes(k)
        for t, v in zip(ts, vs):
            x = _horner(q, t) * bd.h(t) * v
            for j in range(d):
                num[j] += x
                den[j] += abs(x)
                x *= t
    return max((float(abs(a) / b) for a, b in zip(num, den) if b), default=0.0)


# ---------------------------------------------------------------- errors

def error_eval(approx: PadeApproximant, h, z, data: ChebotarevData = None, ctx: PrecisionCtx = None):
    """f_h(z) - π_n(z), computed as R_n/q_n and cross-checked against direct subtraction."""
    bd = _bound(h, data, ctx)
    mp = bd.mp
    z = mp.mpc(z)
    q = [mp.mpc(c) for c in approx.q_coeffs]
    p = [mp.mpc(c) for c in approx.p_coeffs]
    st = bd.surf.star
    if approx.poles:
        dist = min(abs(complex(z) - complex(r)) for r, _ in approx.poles)
        if dist <= 1e-12 * st.diam:
            raise PoleError(f"z is {dist:.2e} from a pole of π_n", distance=dist)
    qz = _horner(q, z)
    if qz == 0:
        raise PoleError("z is a zero of q_n")
    fz = cauchy_value(bd, z)
    pq = _horner(p, z) / qz
    direct = fz - pq
    via_r = _cauchy_poly(bd, z, q) / qz
    eps = mp.mpf(10) ** (-bd.surf.ctx.digits + 2 * bd.surf.ctx.guard)
    if abs(direct - via_r) > eps * (abs(fz) + abs(pq)) * 10 + mp.mpf("1e-8") * abs(via_r):
        raise ConsistencyError(f"error routes disagree: {complex(direct)} vs {complex(via_r)}")
    return via_r


# ---------------------------------------------------------------- roots

def poly_roots(coeffs, ctx: PrecisionCtx, tol=None):
    """All roots of Σ c_k t^k: companion-matrix eigenvalues polished by Aberth iteration."""
    mp = ctx.mp
    c = [mp.mpc(x) for x in coeffs]
    while len(c) > 1 and c[-1] == 0:
        c = c[:-1]
    deg = len(c) - 1
    if deg < 1:
        return []
    lead = c[-1]
    mon = [x / lead for x in c]
    if deg == 1:
        return [-mon[0]]
    comp = np.zeros((deg, deg), dtype=complex)
    comp[1:, :-1] = np.eye(deg - 1)
    comp[:, -1] = [-complex(x) for x in mon[:-1]]
    seeds = np.linalg.eigvals(comp)
    # nudge exact coincidences apart so the Aberth correction is defined
    z = [mp.mpc(s) + mp.mpc(1e-12 * (k + 1), 1e-12 * (k + 2)) for k, s in enumerate(seeds)]
    scale = max(1.0, max(abs(complex(s)) for s in seeds))
    tol = tol if tol is not None else mp.mpf(10) ** (-(ctx.digits // 2) - 2) * scale
    dmon = [k * mon[k] for k in range(1, deg + 1)]
    for _ in range(400):
        worst = 0
        for i in range(deg):
            zi = z[i]
            pv = _horner(mon, zi)
            dp = _horner(dmon, zi)
            if pv == 0:
                continue
            ratio = pv / dp if dp != 0 else mp.mpc(1e-3)
            s = sum(1 / (zi - z[j]) for j in range(deg) if j != i and zi != z[j])
            corr = ratio / (1 - ratio * s)
            z[i] = zi - corr
            worst = max(worst, abs(corr))
        if worst < tol:
            break
    return z


def _cluster(roots, radius: float = 1e-8):
    out = []
    for r in roots:
        for i, (s, m) in enumerate(out):
            if abs(complex(r) - complex(s)) < radius:
                out[i] = ((s * m + r) / (m + 1), m + 1)
                break
        else:
            out.append((r, 1))
    return out


def pole_zero_extract(approx: PadeApproximant, ctx: PrecisionCtx = None):
    """Poles (roots of q_n) and zeros (roots of p_n) as (value, multiplicity) lists."""
    ctx = ctx or PrecisionCtx(approx.digits)
    poles = _cluster(poly_roots(approx.q_coeffs, ctx))
    zeros = _cluster(poly_roots(approx.p_coeffs, ctx)) if len(approx.p_coeffs) > 1 else []
    approx.poles = poles
    approx.zeros = zeros
    return poles, zeros


# ---------------------------------------------------------------- output

def write_approximant_json(approx: PadeApproximant, path) -> None:
    with open(path, "w") as fh:
        json.dump(approx.to_json(), fh, indent=2)


def write_roots_csv(approx: PadeApproximant, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["kind", "re", "im", "multiplicity"])
        for kind, roots in (("pole", approx.poles), ("zero", approx.zeros)):
            for r, m in roots:
                r = complex(r)
                wr.writerow([kind, r.real, r.imag, m])
