import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sovlab.curve import HyperellipticCurve
from sovlab.differentials import (DivisorSpec, constrained_differential, holomorphic_basis,
                                  quadratic_basis, residue_condition)
from sovlab.errors import InconsistentSystem, PreconditionError
from sovlab.field import Differential, FieldElem, residue
from sovlab.oper_from_data import local_pole_pair
from sovlab.scenario import rng_from_seed
from sovlab.zeros import divisor, zeros

X0 = 2.5 + 1.0j
# y = sqrt(f) around X0 on sheet +1; Taylor data from an extended-precision oracle
Y_TAYLOR = [10.254192576486888 - 1.4361503736304273j, -3.1974241034122026 - 12.97013205366735j,
            -6.9479561654099875 + 2.64105897195094j, 1.0359773895192357 + 1.5668221405223868j,
            0.40790157754714995 - 0.19432749972419314j]


@pytest.fixture(scope="module")
def C():
    return HyperellipticCurve.default()


def test_default_curve(C):
    assert C.genus == 3 and C.degree == 7
    np.testing.assert_allclose(np.sort(C.branch_points.real), np.arange(7), atol=1e-12)
    x = 0.3 - 0.7j
    assert abs(C.f(x) - np.prod([x - k for k in range(7)])) < 1e-12


def test_chart_y_frozen(C):
    p = C.point(X0, 1)
    y = C.chart_y(p, 5)
    np.testing.assert_allclose(y.window(0, 5), Y_TAYLOR, rtol=1e-12)


@pytest.mark.parametrize("coeffs, msg", [
    ([1, 0, 0, 0, 0, 0, 0, 0, 1], "even"),
    ([0, 1, 0, 1], "genus"),
    (np.polynomial.polynomial.polyfromroots([0, 1, 1, 2, 3, 4, 5]), "squarefree"),
])
def test_bad_models_rejected(coeffs, msg):
    with pytest.raises(PreconditionError, match=msg):
        HyperellipticCurve(coeffs)


def test_points(C):
    with pytest.raises(PreconditionError):
        C.point(3.0)
    p = C.point(X0, -1)
    assert abs(p.y0 ** 2 - C.f(X0)) < 1e-10
    q = C.conjugate(p)
    assert q.sheet == 1 and C.conjugate(q) == p
    # continuation keeps the sheet for a small move
    m = C.move(p, X0 + 1e-3)
    assert abs(m.y0 - p.y0) < 0.1


@given(st.lists(st.builds(complex, st.floats(-3, 3), st.floats(-3, 3)), min_size=1, max_size=8))
@settings(max_examples=30, deadline=None)
def test_xi_roundtrip(c):
    C = HyperellipticCurve.default()
    back = C.xi_to_x(C.x_to_xi(np.array(c)))
    np.testing.assert_allclose(back[: len(c)], c, atol=1e-10 * max(1, np.max(np.abs(c))))


def test_charts_at_special_points(C):
    inf = C.infinity
    x = C.chart_x(inf, 6)
    assert x.val == -2
    y = C.chart_y(inf, 6)
    assert y.val == -(2 * C.genus + 1)
    b = C.branch_point(2)
    # chart y at a branch point: x - b = y^2 / f'(b) + ...
    xb = C.chart_x(b, 6)
    assert abs(xb.coeff(2) - 1 / C.fprime_at_branch(2)) < 1e-10


def test_field_identities(C):
    y = FieldElem.y(C)
    x = FieldElem.x(C)
    p = C.point(X0, 1)
    assert abs((y * y).evaluate(p) - C.f(X0)) < 1e-9
    assert abs((x * y).inverse().evaluate(p) * X0 * p.y0 - 1) < 1e-12
    d = (x * x).deriv()
    assert abs(d.evaluate(p) - 2 * X0) < 1e-12


def test_residue_of_log_differential(C):
    a = 1.7 + 0.4j
    w = Differential(FieldElem(C, [1.0], None, ((a, 1),)), 1)
    for s in (1, -1):
        assert abs(residue(w, C.point(a, s)) - 1) < 1e-12


def test_bases(C):
    hol = holomorphic_basis(C)
    quad = quadratic_basis(C)
    assert len(hol) == C.genus and len(quad) == 3 * C.genus - 3
    for w in hol + quad:
        zs, ps = divisor(w)
        assert not ps
        assert sum(m for _, m in zs) == (2 if w.degree == 1 else 4) * C.genus - (2 if w.degree == 1 else 4)


@pytest.mark.parametrize("seed", range(3))
def test_residue_theorem_enforced(C, seed):
    rng = rng_from_seed(seed)
    pts = [C.random_point(rng) for _ in range(3)]
    r = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    r[-1] = -r[0] - r[1]
    sol = constrained_differential(C, DivisorSpec.of(pts), [residue_condition(p, v) for p, v in zip(pts, r)])
    got = [residue(sol.diff, p) for p in pts]
    np.testing.assert_allclose(got, r, atol=1e-10)
    assert len(sol.homogeneous) == C.genus
    r[-1] += 0.5
    with pytest.raises(InconsistentSystem):
        constrained_differential(C, DivisorSpec.of(pts), [residue_condition(p, v) for p, v in zip(pts, r)])


@pytest.mark.parametrize("seed", range(4))
def test_local_pole_pair(C, seed):
    rng = rng_from_seed(seed)
    p = C.random_point(rng)
    for order, e in enumerate(local_pole_pair(C, p), start=1):
        d = Differential(e, 2)
        s = d.expand_at(p, 4).strip(1e-12)
        assert s.val == -order and abs(s.leading() - 1) < 1e-12
        for q in [C.conjugate(p), C.infinity] + [C.branch_point(i) for i in range(C.degree)]:
            t = d.expand_at(q, 4)
            neg = t.window(t.val, 0) if t.val < 0 else np.zeros(1)
            assert np.max(np.abs(neg)) < 1e-10


def test_zeros_of_function(C):
    # x - a vanishes at both points over a
    a = 2.2 - 0.3j
    zs = zeros(FieldElem(C, C.linear_factor_xi(a)))
    gen = [(p, m) for p, m in zs if p.kind == "generic"]
    assert len(gen) == 2 and {p.sheet for p, _ in gen} == {1, -1}
    assert all(abs(p.x0 - a) < 1e-10 and m == 1 for p, m in gen)
