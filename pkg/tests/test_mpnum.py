import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from chebpade.errors import DivergenceError, PoleError, QuasiPeriodError
from chebpade.mpnum import PrecisionCtx, agm, elliptic_K, jacobi_cn, theta4

CTX = PrecisionCtx(40)

coord = st.floats(-0.9, 0.9, allow_nan=False)


def close(a, b, rel=1e-32):
    return abs(complex(a) - complex(b)) <= rel * max(1.0, abs(complex(b)))


def test_context_rejects_low_precision():
    with pytest.raises(ValueError):
        PrecisionCtx(20)
    with pytest.raises(ValueError):
        PrecisionCtx(40, guard=2)


def test_contexts_do_not_share_state():
    lo, hi = PrecisionCtx(30), PrecisionCtx(80)
    assert lo.mp.dps == 30 and hi.mp.dps == 80
    assert mpmath.mp.dps == 15


def test_agm_real():
    with mpmath.workdps(40):
        assert close(agm(1, mpmath.sqrt(2) / 2, CTX), mpmath.agm(1, mpmath.sqrt(2) / 2))


def test_agm_zero():
    with pytest.raises(DivergenceError):
        agm(0, 1, CTX)


@settings(max_examples=25, deadline=None)
@given(coord, coord)
def test_elliptic_K_matches_mpmath(x, y):
    k = complex(x, y)
    if abs(k * k - 1) < 1e-3 or abs(k) < 1e-6:
        return
    mod = elliptic_K(k, CTX)
    with mpmath.workdps(40):
        ref = mpmath.ellipk(mpmath.mpc(k) ** 2)
    assert close(mod.K, ref)


def test_elliptic_K_pole():
    with pytest.raises(PoleError):
        elliptic_K(1, CTX)


def test_K_prime_and_tau():
    mod = elliptic_K(0.3, CTX)
    with mpmath.workdps(40):
        assert close(mod.K_prime, mpmath.ellipk(1 - mpmath.mpf("0.3") ** 2))
    assert mpmath.im(mod.tau) > 0


@settings(max_examples=25, deadline=None)
@given(coord, coord, st.floats(0.3, 2.0), st.floats(-0.5, 0.5))
def test_theta4_matches_jtheta(x, y, im_tau, re_tau):
    tau = complex(re_tau, im_tau)
    z = complex(x, y)
    val, der = theta4(z, tau, CTX)
    with mpmath.workdps(40):
        q = mpmath.exp(1j * mpmath.pi * mpmath.mpc(tau))
        ref = mpmath.jtheta(4, mpmath.pi * mpmath.mpc(z), q)
        dref = mpmath.pi * mpmath.jtheta(4, mpmath.pi * mpmath.mpc(z), q, 1)
    assert close(val, ref)
    assert close(der, dref, 1e-30)


def test_theta4_needs_upper_half_plane():
    with pytest.raises(QuasiPeriodError):
        theta4(0.1, -1j, CTX)


@settings(max_examples=20, deadline=None)
@given(coord, coord, st.floats(0.05, 0.9))
def test_cn_matches_ellipfun(x, y, k):
    u = complex(x, y)
    with mpmath.workdps(40):
        ref = mpmath.ellipfun("cn", mpmath.mpc(u), m=mpmath.mpf(k) ** 2)
    assert close(jacobi_cn(u, k, CTX), ref, 1e-30)


def test_cn_degenerate_modulus():
    assert close(jacobi_cn(0.7, 0, CTX), mpmath.cos(0.7))
