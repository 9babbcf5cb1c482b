import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chebpade.analysis import (
    SpuriousReport,
    best_rational,
    classify_orbit,
    covering_radius,
    find_relation,
    orbit_points,
    rate_check,
    separation_radius,
    spurious_compare,
    write_distance_csv,
    write_orbit_csv,
    write_report_json,
)
from chebpade.chebotarev import chebotarev
from chebpade.errors import InsufficientDataError
from chebpade.mpnum import PrecisionCtx
from chebpade.szego import Density
from chebpade.verify import GENERIC, equilateral

from oracles import brute_force_relation, star_green

TAU = complex(0.5, math.sqrt(3) / 2)
MP = PrecisionCtx(60).mp


@settings(max_examples=60, deadline=None)
@given(st.fractions(min_value=0, max_value=1, max_denominator=500))
def test_best_rational_recovers_fractions(fr):
    got = best_rational(MP.mpf(fr.numerator) / fr.denominator, 1000, MP.mpf(10) ** -30)
    assert got == fr


def test_best_rational_irrational():
    assert best_rational(MP.sqrt(2), 10 ** 6, MP.mpf(10) ** -30) is None
    assert best_rational(MP.pi, 200, 1e-2) == Fraction(22, 7)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_find_relation_against_brute_force(a, b):
    bound, tol = 12, 1e-3
    ref = brute_force_relation(a, b, bound, tol)
    got = find_relation(a, b, bound, tol)
    if got is not None:
        m2, m3, k = got
        assert max(abs(m2), abs(m3)) <= bound
        assert abs(m2 * a + m3 * b - k) < tol
        assert ref is not None and abs(m2) + abs(m3) >= ref
    # the lattice search may miss non-minimal relations but not small exact ones


@pytest.mark.parametrize("m2,m3", [(1, 1), (2, -3), (5, 7), (-4, 9)])
def test_find_relation_planted(m2, m3):
    x = MP.sqrt(2) / 10
    w3 = (1 - m2 * x) / m3
    got = find_relation(x, w3, 100, MP.mpf(10) ** -25)
    assert got is not None
    g2, g3, k = got
    assert (g2, g3) in ((m2, m3), (-m2, -m3))


def test_find_relation_none():
    assert find_relation(MP.sqrt(2) / 10, MP.sqrt(3) / 10, 10 ** 6, MP.mpf(10) ** -25) is None


def test_classify_finite():
    w = [MP.mpf(1) / 2, MP.mpf(1) / 3, MP.mpf(1) / 6]
    rep = classify_orbit(w, 0, TAU, N=600)
    assert rep.classification == "finite" and rep.period == 6
    pts = np.round(orbit_points(w, 0, TAU, 600) * 1e6) % 10 ** 6
    assert len({tuple(p) for p in pts.tolist()}) <= 6


def test_classify_arcs():
    x = MP.sqrt(2) / 10
    w = [1 - x - (MP.mpf(1) / 2 - x), x, MP.mpf(1) / 2 - x]
    rep = classify_orbit(w, 0.1 + 0.2j, TAU, N=1000)
    assert rep.classification == "arcs"
    _, m2, m3 = rep.relation
    assert abs(m2) == abs(m3) == 2


def test_classify_dense():
    w2, w3 = MP.sqrt(2) / 10, MP.sqrt(3) / 10
    rep = classify_orbit([1 - w2 - w3, w2, w3], 0, TAU, N=3000)
    assert rep.classification == "dense"
    radii = [r for _, r in rep.discrepancy_curve]
    assert radii == sorted(radii, reverse=True) and radii[-1] < radii[0] / 3


def test_float_weights_flag_the_bound():
    rep = classify_orbit([0.2, math.sqrt(2) / 10, 0.8 - math.sqrt(2) / 10], 0, TAU, N=200)
    assert any("bound reduced" in f for f in rep.flags)
    assert rep.bound <= 1000


def test_classify_rejects_bad_weights():
    with pytest.raises(ValueError):
        classify_orbit([0.5, 0.5, 0.5], 0, TAU)
    with pytest.raises(ValueError):
        classify_orbit([0.5, 0.3, 0.2], 0, TAU, N=10)


def test_covering_radius_of_lattice_grid():
    m = 10
    g = (np.arange(m) / m)
    pts = np.array([(x, y) for x in g for y in g])
    # the square grid on the square torus: farthest point sits at the cell center
    exact = math.sqrt(2) / (2 * m)
    # a 30-point sample grid contains the cell centers; a finer one misses by under a spacing
    assert covering_radius(pts, 1j, grid=30) == pytest.approx(exact, rel=1e-9)
    assert exact - math.sqrt(2) / 200 < covering_radius(pts, 1j, grid=200) <= exact


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0, 10), min_size=1, max_size=12), st.integers(1, 12), st.floats(0.1, 5))
def test_separation_radius(dists, n, diam):
    r = separation_radius(dists, n, diam)
    assert r >= 0.05 * diam
    near = sorted(dists)[: n - 1]
    assert all(d <= r / 5 + 1e-12 for d in near)


def test_orbit_outputs(tmp_path):
    rep = classify_orbit([MP.mpf(1) / 2, MP.mpf(1) / 3, MP.mpf(1) / 6], 0, TAU, N=100)
    write_orbit_csv(rep, tmp_path / "o.csv")
    rows = (tmp_path / "o.csv").read_text().splitlines()
    assert rows[0] == "n,x,y" and len(rows) == 101
    assert json.loads(json.dumps(rep.to_json()))["period"] == 6


@pytest.fixture(scope="module")
def generic():
    return chebotarev(GENERIC, PrecisionCtx(50))


@pytest.fixture(scope="module")
def spurious(generic):
    return spurious_compare(Density(), generic, range(2, 14))


def test_spurious_sheet2_has_no_far_roots(spurious):
    for r in spurious.records:
        assert r.error is None
        if r.sheet == 2:
            assert r.far_roots == 0


def test_spurious_pole_tracks_zn(spurious, generic):
    st = generic.star()
    s1 = spurious.sheet1()
    # the prediction is asymptotic and only sharp when ẑ_n is well away from Δ
    clear = [r for r in s1 if st.dist_to_delta(complex(r.zn.z)) > 0.15]
    assert len(clear) >= 3
    for r in clear:
        assert r.far_roots == 1
        assert r.distance < 1e-3
    assert spurious.trend() < 0


def test_spurious_outputs(spurious, tmp_path):
    write_distance_csv(spurious, tmp_path / "d.csv")
    write_report_json(spurious, tmp_path / "r.json", {"triple": "generic"})
    head = (tmp_path / "d.csv").read_text().splitlines()[0]
    assert head == "n,sheet,re_zn,im_zn,re_root,im_root,distance,far_roots"
    payload = json.loads((tmp_path / "r.json").read_text())
    assert payload["config"] == {"triple": "generic"} and len(payload["records"]) == 12


def test_trend_needs_two_points():
    assert SpuriousReport().trend() is None


def test_rate_prediction_uses_green():
    ctx = PrecisionCtx(50)
    d = chebotarev(equilateral(ctx), ctx)
    z = 1.5 + 1j
    [(zz, measured, predicted)] = rate_check(Density(), d, [z], range(6, 16))
    assert predicted == pytest.approx(star_green(z) ** -2, rel=1e-12)
    # period-3 structure biases the fitted slope a little
    assert measured == pytest.approx(predicted, rel=0.1)


def test_rate_check_needs_orders(generic):
    with pytest.raises(InsufficientDataError):
        rate_check(Density(), generic, [2 + 2j], range(3, 5))
