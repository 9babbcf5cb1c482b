"""Multiprecision plumbing and the few elliptic special functions we need.

Every routine takes a :class:`PrecisionCtx`.  The context owns a private
mpmath context, so precision never leaks through mpmath's global state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

from mpmath.ctx_mp import MPContext

from .errors import (
    DegenerateModuliError,
    DivergenceError,
    PoleError,
    QuasiPeriodError,
)


@dataclass(frozen=True)
class PrecisionCtx:
    """Decimal working precision plus guard digits."""

    digits: int = 30
    guard: int = 5

    def __post_init__(self):
        if self.digits < 30:
            raise ValueError("digits must be >= 30")
        if self.guard < 5:
            raise ValueError("guard must be >= 5")

    @cached_property
    def mp(self) -> MPContext:
        ctx = MPContext()
        ctx.dps = self.digits
        return ctx

    @property
    def series_tol(self):
        return self.mp.mpf(10) ** (-self.digits + self.guard)

    @property
    def tol(self) -> float:
        return 10.0 ** (-self.digits + self.guard)

    def with_digits(self, digits: int) -> "PrecisionCtx":
        return PrecisionCtx(digits=max(30, int(digits)), guard=self.guard)

    def doubled(self) -> "PrecisionCtx":
        return self.with_digits(2 * self.digits)

    def c(self, z):
        """Coerce a number into this context's complex type."""
        return self.mp.mpc(z)


@dataclass(frozen=True)
class EllipticModuli:
    k: object
    k_prime: object
    K: object
    K_prime: object
    tau: object
    nome: object
    ctx: PrecisionCtx = field(repr=False, compare=False)


def agm(a, b, ctx: PrecisionCtx):
    """Arithmetic-geometric mean with the standard branch selection.

    The geometric step takes the principal root and flips it when that
    keeps the pair closer together (|a-b| <= |a+b|), which is the usual
    convergent choice for complex arguments.
    """
    mp = ctx.mp
    a = mp.mpc(a)
    b = mp.mpc(b)
    if a == 0 or b == 0:
        raise DivergenceError("agm requires nonzero arguments")
    tol = ctx.series_tol
    cap = int(8 * math.log2(ctx.digits)) + 8
    for _ in range(cap):
        if abs(a - b) <= tol * abs(a):
            return (a + b) / 2
        a1 = (a + b) / 2
        b1 = mp.sqrt(a * b)
        if abs(a1 - b1) > abs(a1 + b1):
            b1 = -b1
        a, b = a1, b1
    raise DivergenceError(f"agm did not converge after {cap} iterations")


def elliptic_K(k, ctx: PrecisionCtx) -> EllipticModuli:
    """Complete elliptic integrals K(k), K(k') and the induced nome."""
    mp = ctx.mp
    k = mp.mpc(k)
    if abs(k * k - 1) <= ctx.series_tol:
        raise PoleError(f"K(k) has a logarithmic pole at k = {k}")
    kp = mp.sqrt(1 - k * k)
    K = mp.pi / (2 * agm(1, kp, ctx))
    if k == 0:
        inf = mp.inf
        return EllipticModuli(k, kp, K, mp.mpc(inf), mp.mpc(0, inf), mp.mpc(0), ctx)
    Kp = mp.pi / (2 * agm(1, mp.sqrt(k * k), ctx))
    tau = 1j * Kp / K
    if mp.im(tau) <= ctx.series_tol:
        raise DegenerateModuliError(f"Im(tau) = {mp.nstr(mp.im(tau), 5)} is not positive")
    return EllipticModuli(k, kp, K, Kp, tau, mp.exp(1j * mp.pi * tau), ctx)


def _nome(tau, ctx):
    mp = ctx.mp
    tau = mp.mpc(tau)
    if mp.im(tau) <= 0:
        raise QuasiPeriodError(f"Im(tau) must be positive, got {tau}")
    return mp.exp(1j * mp.pi * tau)


def _growth(z, ctx):
    # max |e^{±2πiz}|: bounds |cos(2πnz)|, |sin(2πnz)| by growth**n
    mp = ctx.mp
    return mp.exp(2 * mp.pi * abs(mp.im(z)))


def theta4(z, tau, ctx: PrecisionCtx):
    """Period-1 theta function 1 + 2Σ(-1)^n q^(n²) cos(2πnz) and its z-derivative."""
    mp = ctx.mp
    z = mp.mpc(z)
    q = _nome(tau, ctx)
    aq = abs(q)
    g = _growth(z, ctx)
    val = mp.mpc(1)
    der = mp.mpc(0)
    tol = ctx.series_tol
    n = 1
    while True:
        qn = q ** (n * n)
        s = -1 if n % 2 else 1
        val += 2 * s * qn * mp.cos(2 * mp.pi * n * z)
        der -= 4 * mp.pi * n * s * qn * mp.sin(2 * mp.pi * n * z)
        bound = aq ** ((n + 1) ** 2) * g ** (n + 1) * (1 + 4 * mp.pi * (n + 1))
        if bound < tol and n > 1:
            break
        n += 1
        if n > 10 ** 5:
            raise DivergenceError("theta series did not reach tolerance")
    return val, der


def _theta2(z, q, ctx):
    mp = ctx.mp
    aq = abs(q)
    g = _growth(z, ctx)
    tol = ctx.series_tol
    out = mp.mpc(0)
    n = 0
    while True:
        e = (n + mp.mpf(1) / 2) ** 2
        out += 2 * q ** e * mp.cos((2 * n + 1) * mp.pi * z)
        if aq ** ((n + mp.mpf(3) / 2) ** 2) * g ** (n + 2) < tol:
            break
        n += 1
    return out


def jacobi_cn(u, k, ctx: PrecisionCtx):
    """cn(u, k) as the theta quotient (θ4(0)/θ2(0))·θ2(v)/θ4(v), v = u/2K."""
    mp = ctx.mp
    u = mp.mpc(u)
    k = mp.mpc(k)
    if k == 0:
        return mp.cos(u)
    mod = elliptic_K(k, ctx)
    q = mod.nome
    if abs(q) >= 0.9:
        raise DegenerateModuliError("nome too close to the unit circle for the theta route")
    v = u / (2 * mod.K)
    t4v, _ = theta4(v, mod.tau, ctx)
    if abs(t4v) <= ctx.series_tol:
        raise PoleError(f"cn has a pole at u = {mp.nstr(u, 10)} (theta4 vanishes)")
    t40, _ = theta4(0, mod.tau, ctx)
    return t40 / _theta2(0, q, ctx) * _theta2(v, q, ctx) / t4v
