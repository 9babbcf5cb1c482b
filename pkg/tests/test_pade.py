import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chebpade.chebotarev import chebotarev
from chebpade.errors import ConsistencyError, PoleError, PrecisionError
from chebpade.mpnum import PrecisionCtx
from chebpade.pade import (
    MomentSeries,
    compute_moments,
    error_eval,
    orthogonality_residual,
    pade_solve,
    pole_zero_extract,
    poly_roots,
    required_digits,
    write_approximant_json,
    write_roots_csv,
)
from chebpade.szego import Density
from chebpade.verify import CUBIC, GENERIC, equilateral

from oracles import (
    chebyshev_moments,
    laurent_of_inverse_sqrt,
    monic_chebyshev,
    pade_by_linear_solve,
)

CTX = PrecisionCtx(50)


@pytest.fixture(scope="module")
def data():
    return chebotarev(GENERIC, CTX)


@pytest.fixture(scope="module")
def moments(data):
    return compute_moments(Density.parse(CUBIC), 24, data)


def test_required_digits():
    assert required_digits(1) == 50
    assert required_digits(30) == 120


@pytest.mark.parametrize("n", [1, 2, 5, 9])
def test_chebyshev_denominators(n):
    mom = MomentSeries(chebyshev_moments(2 * n + 2), None, 60)
    ap = pade_solve(mom, n)
    assert ap.degree == n and ap.defect == 0
    ref = monic_chebyshev(n)
    assert max(abs(complex(a) - b) for a, b in zip(ap.q_coeffs, ref)) < 1e-12


def test_unit_moments_are_laurent_coefficients(data):
    mom = compute_moments(Density(), 12, data)
    ref = laurent_of_inverse_sqrt([data.a0] + list(data.anchors), 12)
    for k in range(1, 13):
        assert abs(mom.f(k) - ref[k]) < 1e-40


@pytest.mark.parametrize("n", [3, 6, 10])
def test_against_linear_solve(moments, n):
    ap = pade_solve(moments, n)
    ref = pade_by_linear_solve(moments.coeffs, n, dps=60)
    assert ap.degree == n
    assert max(abs(a - b) for a, b in zip(ap.q_coeffs, ref)) < 1e-30


def test_contact_order(moments):
    n = 8
    ap = pade_solve(moments, n)
    f = [0] + list(moments.coeffs)
    # q f - p = O(z^(-n-1)): the coefficients of z^-1..z^-n vanish
    for m in range(1, n + 1):
        s = sum(ap.q_coeffs[j] * f[j + m] for j in range(n + 1))
        assert abs(s) < 1e-35


def test_orthogonality(data, moments):
    ap = pade_solve(moments, 6)
    assert orthogonality_residual(ap, moments.density) < 1e-30


def test_error_matches_unit_function(data):
    mp = CTX.mp
    bd = Density().bind(data)
    ap = pade_solve(compute_moments(bd, 14, data), 6)
    pole_zero_extract(ap)
    for z in (2 + 1j, -1.5 + 0.4j, 0.2 - 1.3j):
        z = mp.mpc(z)
        w = mp.sqrt(mp.fprod([z - a for a in [data.a0] + list(data.anchors)]))
        if mp.re(w / z ** 2) < 0:
            w = -w
        # far enough out that the principal root is the w/z^2 -> 1 branch
        ref = 1 / w - ap(z)
        assert abs(error_eval(ap, bd, z) - ref) < 1e-35 * max(1, abs(1 / w))


def test_error_decreases(data, moments):
    bd = moments.density
    z = CTX.mp.mpc(1.8, 1.2)
    errs = [abs(error_eval(pade_solve(moments, n), bd, z)) for n in (4, 8, 12)]
    assert errs[0] > errs[1] > errs[2]


def test_equilateral_defect():
    ctx = PrecisionCtx(50)
    d = chebotarev(equilateral(ctx), ctx)
    mom = compute_moments(Density(), 12, d)
    q3 = pade_solve(mom, 3)
    q4 = pade_solve(mom, 4)
    assert q4.degree == 3 and q4.defect == 1
    assert max(abs(a - b) for a, b in zip(q3.q_coeffs, q4.q_coeffs)) < 1e-30


def test_too_few_moments(moments):
    with pytest.raises(ValueError):
        pade_solve(MomentSeries(moments.coeffs[:5], None, 50), 3)


def test_precision_error_without_retry(moments):
    low = MomentSeries(moments.coeffs, None, 40)
    with pytest.raises(PrecisionError):
        pade_solve(low, 12, retry=False)


def test_all_zero_moments():
    mp = CTX.mp
    with pytest.raises(ConsistencyError):
        pade_solve(MomentSeries([mp.mpc(0)] * 8, None, 50), 3)


def test_pole_distance_guard(data, moments):
    ap = pade_solve(moments, 5)
    pole_zero_extract(ap)
    r = ap.poles[0][0]
    with pytest.raises(PoleError):
        error_eval(ap, moments.density, r)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=1, max_size=8))
def test_poly_roots(roots):
    coeffs = np.poly(roots)[::-1]
    got = poly_roots(list(coeffs), PrecisionCtx(30))
    assert len(got) == len(roots)
    ref = np.roots(coeffs[::-1])
    # compare as multisets through the residual, robust to clustered roots
    mp = PrecisionCtx(30).mp
    scale = max(1.0, max(abs(r) for r in roots)) ** len(roots)
    for g in got:
        assert abs(complex(mp.polyval(list(map(mp.mpc, coeffs[::-1])), g))) < 1e-10 * scale
    assert abs(sum(complex(g) for g in got) - sum(ref)) < 1e-6 * max(1, len(roots))


def test_poly_roots_high_precision():
    ctx = PrecisionCtx(60)
    mp = ctx.mp
    exact = [mp.mpf(1) / 3, mp.mpc(-1, 2) / 7, mp.sqrt(2)]
    coeffs = [mp.mpc(1)]
    for r in exact:
        coeffs = [(coeffs[i - 1] if i else 0) - r * (coeffs[i] if i < len(coeffs) else 0) for i in range(len(coeffs) + 1)]
    got = poly_roots(coeffs, ctx)
    for r in exact:
        assert min(abs(g - r) for g in got) < 1e-50


def test_outputs(moments, tmp_path):
    ap = pade_solve(moments, 4)
    pole_zero_extract(ap)
    write_approximant_json(ap, tmp_path / "a.json")
    write_roots_csv(ap, tmp_path / "r.csv")
    rows = (tmp_path / "r.csv").read_text().splitlines()
    assert rows[0] == "kind,re,im,multiplicity"
    assert sum(1 for r in rows if r.startswith("pole")) == 4
