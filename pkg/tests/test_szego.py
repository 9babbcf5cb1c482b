import mpmath
import pytest
from hypothesis import assume, given, settings, strategies as st

from chebpade.chebotarev import chebotarev
from chebpade.errors import AmbiguousTraceError, GeometryError, PoleError
from chebpade.mpnum import PrecisionCtx
from chebpade.surface import INF1
from chebpade.szego import (
    Density,
    build_Sn,
    cauchy_transforms,
    log_szego,
    route_base,
    solve_zn,
    szego_function,
    write_sn_csv,
)
from chebpade.verify import CUBIC, GENERIC, equilateral

CTX = PrecisionCtx(30)
DENSITIES = ["one", "analytic:exp", CUBIC]


@pytest.fixture(scope="module")
def data():
    return chebotarev(GENERIC, CTX)


@pytest.fixture(scope="module")
def star_data():
    return chebotarev(equilateral(CTX), CTX)


def test_parse():
    assert Density.parse("one").kind == "unit"
    d = Density.parse("recip-poly:1,0,2,0")
    assert d.kind == "recip_poly" and d.degree == 2
    assert Density.parse("analytic:gauss").name == "gauss"
    with pytest.raises(ValueError):
        Density.parse("bogus")
    with pytest.raises(ValueError):
        Density("analytic", name="nope")
    with pytest.raises(ValueError):
        Density("recip_poly", (0, 0))


def test_route_base():
    assert [route_base(k) for k in (1, 2, 3)] == [2, 3, 1]


def test_pole_on_delta(data):
    a = complex(data.anchors[1])
    with pytest.raises((PoleError, GeometryError)):
        Density("recip_poly", (-a, 1)).bind(data)


@pytest.mark.parametrize("text", DENSITIES[1:])
@pytest.mark.parametrize("kappa", [1, 2, 3])
def test_boundary_jump(data, text, kappa):
    # log S+ + log S- = log h - log G_(h,κ), less m0/β_κ on arc κ
    bd = Density.parse(text).bind(data, kappa)
    mp = bd.mp
    beta = bd.surf.periods.beta[kappa - 1]
    for k in (1, 2, 3):
        t, tg = bd.surf.arc_point(k, 0.4)
        nrm = 1j * tg / abs(tg)
        s = log_szego(bd, mp.mpc(t + 1e-7 * nrm)) + log_szego(bd, mp.mpc(t - 1e-7 * nrm))
        ref = bd.log_branch(mp.mpc(t)) - bd.logGhk - (bd.m0 / beta if k == kappa else 0)
        assert abs(s - ref) < 1e-6


@pytest.mark.parametrize("text", DENSITIES[1:])
def test_normalized_at_infinity(data, text):
    bd = Density.parse(text).bind(data)
    mp = bd.mp
    assert abs(log_szego(bd, mp.mpc(3e5, 2e5))) < 1e-4
    assert log_szego(bd, "inf") == 0


def test_unit_density_is_trivial(data):
    bd = Density().bind(data)
    assert bd.m0 == 0 and bd.gamma == 0
    assert szego_function(Density(), 3, 0.3 + 2j, data) == 1


def test_on_delta_is_ambiguous(data):
    bd = Density.parse("analytic:exp").bind(data)
    with pytest.raises(AmbiguousTraceError):
        log_szego(bd, data.a0)


points = st.builds(complex, st.floats(-1.5, 1.5), st.floats(-1, 2))


@settings(max_examples=10, deadline=None)
@given(points)
def test_cauchy_transform_against_quadrature(data, z):
    mp = CTX.mp
    assume(data.star().dist_to_delta(z) > 0.05)
    # straight chords only agree with the arcs outside the lenses
    assume(not any(data.star().in_lens(z, k) for k in (1, 2, 3)))
    bd = Density.parse("analytic:exp").bind(data)
    C, _ = cauchy_transforms(lambda t: t * t, mp.mpc(z), density=bd)
    with mpmath.workdps(30):
        a0 = mpmath.mpc(data.a0)
        zz = mpmath.mpc(z)
        tot = 0
        for ak in data.anchors:
            d = mpmath.mpc(ak) - a0
            tot += mpmath.quad(lambda s: (a0 + s * d) ** 2 / (a0 + s * d - zz) * d, [0, 1])
        ref = tot / (2j * mpmath.pi)
    assert abs(C - ref) < 1e-20


def test_equilateral_zn_cycle(star_data):
    a0 = star_data.a0
    got = []
    for n in range(1, 7):
        zn = solve_zn(n, Density(), star_data).zn
        assert solve_zn(n, Density(), star_data).residual < 1e-20
        if zn.is_inf:
            got.append(("inf", zn.sheet))
        else:
            assert abs(zn.z - a0) < 1e-20
            got.append(("a0",))
    assert got == [("inf", 1), ("a0",), ("inf", 2)] * 2


@pytest.mark.parametrize("text", DENSITIES)
@pytest.mark.parametrize("n", [1, 2, 5])
def test_zn_abel_condition(data, text, n):
    sol = solve_zn(n, Density.parse(text), data)
    assert sol.residual < 1e-20


@pytest.mark.parametrize("text", DENSITIES)
@pytest.mark.parametrize("kappa", [1, 2, 3])
def test_product_law_constant(data, text, kappa):
    sd = build_Sn(4, Density.parse(text), kappa, data)
    mp = sd.surf.mp
    for z in (1.2 + 1.1j, -0.8 + 0.1j, 0.3 - 0.9j):
        xi = sd.xi_at(mp.mpc(z))
        assert abs(abs(xi) - 1) < 1e-18
        assert abs(xi - sd.xi_n) < 1e-18


def test_sn_normalized_at_infinity(data):
    sd = build_Sn(3, Density.parse(CUBIC), 3, data)
    mp = sd.surf.mp
    # monic pole of order n at infinity on sheet 1
    big = mp.mpc(4e6, 1e6)
    assert abs(sd.Sn_sheet1(big) / big ** 3 - 1) < 1e-5
    with pytest.raises(PoleError):
        sd.Sn(INF1)


def test_sn_csv(data, tmp_path):
    sd = build_Sn(2, Density.parse("analytic:exp"), 3, data)
    write_sn_csv(sd, tmp_path / "sn.csv", [1.5 + 1j, -1j])
    rows = (tmp_path / "sn.csv").read_text().splitlines()
    assert rows[0] == "re_z,im_z,sheet,re_value,im_value,kind"
    assert len(rows) == 7
