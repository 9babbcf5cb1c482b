import cmath
import json

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chebpade.chebotarev import chebotarev, normalize_triple, write_arcs_csv, write_json
from chebpade.errors import GeometryError
from chebpade.mpnum import PrecisionCtx
from chebpade.verify import GENERIC, equilateral

from oracles import star_capacity, trajectory_integrals

CTX = PrecisionCtx(30)


def good_triangle(pts, min_angle=15.0):
    a = [complex(p) for p in pts]
    for i in range(3):
        u, v = a[(i + 1) % 3] - a[i], a[(i + 2) % 3] - a[i]
        if abs(u) < 0.1 or abs(v) < 0.1:
            return False
        if abs(np.degrees(cmath.phase(v / u))) < min_angle:
            return False
    return True


point = st.builds(complex, st.floats(-1, 1), st.floats(-1, 1))
triangles = st.tuples(point, point, point).filter(good_triangle)


@pytest.fixture(scope="module")
def generic():
    return chebotarev(GENERIC, CTX)


def test_equilateral_center_weights_capacity():
    d = chebotarev(equilateral(CTX), CTX)
    assert abs(complex(d.a0)) < 1e-25
    for w in d.weights:
        assert abs(w - CTX.mp.mpf(1) / 3) < 1e-25
    assert abs(float(d.capacity) - star_capacity()) < 1e-14


def test_center_on_trajectories(generic):
    ints = trajectory_integrals(generic.a0, generic.anchors)
    for I in ints:
        assert abs(float(mpmath.re(I))) < 1e-12 * float(abs(I))


def test_masses_match_quadrature(generic):
    ints = trajectory_integrals(generic.a0, generic.anchors)
    for I, w in zip(ints, generic.weights):
        assert abs(float(abs(I) / mpmath.pi) - float(w)) < 1e-12


@settings(max_examples=5, deadline=None)
@given(triangles)
def test_random_triangles(pts):
    d = chebotarev(pts, CTX)
    assert abs(sum(d.weights) - 1) < 1e-20
    assert all(w > 0 for w in d.weights)
    ints = trajectory_integrals(d.a0, d.anchors, dps=20)
    for I in ints:
        assert abs(float(mpmath.re(I))) < 1e-10 * float(abs(I))


@settings(max_examples=3, deadline=None)
@given(triangles, point.filter(lambda a: abs(a) > 0.3), point)
def test_affine_covariance(pts, a, b):
    d = chebotarev(pts, CTX)
    e = chebotarev([a * p + b for p in pts], CTX)
    assert abs(complex(e.a0) - (a * complex(d.a0) + b)) < 1e-10
    assert abs(float(e.capacity) - abs(a) * float(d.capacity)) < 1e-10
    assert np.allclose(sorted(map(float, d.weights)), sorted(map(float, e.weights)), atol=1e-12)


def test_permutation_invariance(generic):
    a, b, c = GENERIC
    e = chebotarev((c, a, b), CTX)
    assert abs(complex(e.a0) - complex(generic.a0)) < 1e-20
    assert np.allclose([float(w) for w in e.raw_weights],
                       [float(w) for w in generic.raw_weights[2:] + generic.raw_weights[:2]], atol=1e-20)


def test_arcs_are_trajectories(generic):
    anchors = [complex(a) for a in generic.anchors]
    for arc in generic.arcs:
        assert abs(arc.samples[0] - complex(generic.a0)) < 1e-10
        assert abs(arc.samples[-1] - anchors[arc.index - 1]) < 1e-10
        assert arc.trajectory_residual(complex(generic.a0), anchors) < 1e-6


@pytest.mark.parametrize("pts", [(0, 1, 2), (0, 1 + 1j, 2 + 2j), (0, 0, 1)])
def test_degenerate_triples(pts):
    with pytest.raises(GeometryError):
        chebotarev(pts, CTX)


@settings(max_examples=30, deadline=None)
@given(triangles)
def test_normalization_roundtrip(pts):
    tri = normalize_triple(pts)
    v = tri.normalized()
    assert abs(v[0]) < 1e-12
    assert abs(abs(v[1]) - 1) < 1e-12
    assert 0 < tri.rho <= 1 + 1e-12
    for j, z in enumerate(pts):
        assert abs(tri.from_normalized(tri.to_normalized(z)) - z) < 1e-12


def test_outputs(generic, tmp_path):
    write_arcs_csv(generic, tmp_path / "arcs.csv")
    write_json(generic, tmp_path / "c.json")
    head = (tmp_path / "arcs.csv").read_text().splitlines()[0]
    assert head == "k,t,re,im"
    payload = json.loads((tmp_path / "c.json").read_text())
    assert abs(sum(payload["weights"]) - 1) < 1e-12
