import mpmath
import pytest
from hypothesis import assume, given, settings, strategies as st

from chebpade.chebotarev import chebotarev
from chebpade.errors import PoleError
from chebpade.mpnum import PrecisionCtx
from chebpade.surface import (
    INF1,
    INF2,
    SheetPoint,
    lattice_coords,
    lattice_distance,
    surface_for,
)
from chebpade.verify import GENERIC, equilateral

from oracles import arc_first_kind, star_green

CTX = PrecisionCtx(30)


@pytest.fixture(scope="module")
def surf():
    return surface_for(chebotarev(GENERIC, CTX))


@pytest.fixture(scope="module")
def star_surf():
    return surface_for(chebotarev(equilateral(CTX), CTX))


def off_delta(surf, z, margin=0.05):
    return surf.star.dist_to_delta(complex(z)) > margin


points = st.builds(complex, st.floats(-1.5, 1.5), st.floats(-1, 2))


@settings(max_examples=20, deadline=None)
@given(points, st.sampled_from([1, 2]))
def test_w_squares_to_quartic(surf, z, sheet):
    assume(off_delta(surf, z))
    mp = surf.mp
    z = mp.mpc(z)
    w = surf.w(SheetPoint(z, sheet))
    assert abs(w ** 2 - mp.fprod([z - a for a in surf.star.a])) < 1e-25 * max(1, abs(w) ** 2)
    assert surf.w(SheetPoint(z, 3 - sheet)) == -w


def test_w_at_infinity(surf):
    mp = surf.mp
    z = mp.mpc(40, 30)
    w = surf.w(SheetPoint(z, 1))
    assert abs(w / z ** 2 - 1) < 0.1
    with pytest.raises(PoleError):
        surf.w(INF1)


def test_periods_against_segment_quadrature(surf):
    P = surf.periods
    d = surf.data
    ref = arc_first_kind(d.a0, d.anchors)
    for b, I in zip(P.beta, ref):
        ratio = complex(b / I)
        assert abs(abs(ratio) - 1 / mpmath.pi) < 1e-15
        assert abs(ratio.real) < 1e-15
    assert abs(complex(sum(P.beta))) < 1e-25
    assert mpmath.im(P.tau_ratio) > 0


def test_omega_carries_the_masses(surf):
    mp = surf.mp
    for o, w in zip(surf.periods.omega, surf.data.weights):
        v = o / (2j * mp.pi)
        assert abs(mp.re(v) - w) < 1e-25
        assert abs(mp.im(v)) < 1e-25


@settings(max_examples=10, deadline=None)
@given(points, st.sampled_from([1, 2]))
def test_green_derivative(surf, z, sheet):
    assume(off_delta(surf, z, 0.1))
    mp = surf.mp
    z = mp.mpc(z)
    h = mp.mpf("1e-9")
    # a short horizontal difference must not straddle a cut
    assume(surf.star.dist_to_delta(complex(z)) > 1e-3)
    dl = (surf.log_green(SheetPoint(z + h, sheet)) - surf.log_green(SheetPoint(z - h, sheet))) / (2 * h)
    ref = (z - surf.data.a0) / surf.w(SheetPoint(z, sheet))
    assert abs(dl - ref) < 1e-12 * abs(ref)


@settings(max_examples=10, deadline=None)
@given(points)
def test_abel_derivative(surf, z):
    assume(off_delta(surf, z, 0.1))
    mp = surf.mp
    z = mp.mpc(z)
    h = mp.mpf("1e-9")
    da = (surf.abel(SheetPoint(z + h, 1)) - surf.abel(SheetPoint(z - h, 1))) / (2 * h)
    ref = 1 / (2j * mp.pi * surf.periods.beta[1] * surf.w(SheetPoint(z, 1)))
    assert abs(da - ref) < 1e-12 * abs(ref)


@settings(max_examples=15, deadline=None)
@given(points)
def test_green_modulus(surf, z):
    assume(off_delta(surf, z))
    g1 = abs(surf.green(SheetPoint(surf.mp.mpc(z), 1)))
    g2 = abs(surf.green(SheetPoint(surf.mp.mpc(z), 2)))
    assert g1 > 1
    assert abs(g1 * g2 - 1) < 1e-20


@pytest.mark.parametrize("z", [2, 1.5 + 1j, -0.3 + 0.2j, 0.1 - 0.7j, -1.2j])
def test_green_of_star(star_surf, z):
    assert abs(float(abs(star_surf.green(SheetPoint(star_surf.mp.mpc(z), 1)))) - star_green(z)) < 1e-12


@settings(max_examples=8, deadline=None)
@given(points, st.sampled_from([1, 2]))
def test_inversion_roundtrip(surf, z, sheet):
    assume(off_delta(surf, z, 0.1))
    mp = surf.mp
    pt = SheetPoint(mp.mpc(z), sheet)
    back = surf.invert(surf.abel(pt))
    assert back.sheet == sheet
    assert abs(complex(back.z) - z) < 1e-20


def test_inversion_reaches_infinity(surf):
    back = surf.invert(surf.abel(INF2))
    assert back.is_inf and back.sheet == 2


@settings(max_examples=50, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-0.5, 0.5), st.floats(0.3, 2))
def test_lattice_coords(x, y, re_tau, im_tau):
    tau = complex(re_tau, im_tau)
    v = complex(x, y)
    a, b = lattice_coords(v, tau)
    assert 0 <= a < 1 and 0 <= b < 1
    shift = v - (a + b * tau)
    m, n = lattice_coords(shift, tau, centered=True)
    assert abs(m) < 1e-9 and abs(n) < 1e-9
    assert lattice_distance(v + 3 - 2 * tau, tau) == pytest.approx(lattice_distance(v, tau), abs=1e-9)
