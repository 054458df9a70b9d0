import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sovlab.conn2oper import (LocalConnection, apparent_data, gauge_transform, oper_from_forms,
                              potential_from_abc)
from sovlab.errors import InvalidChart, MomentObstruction, PreconditionError
from sovlab.field import residue
from sovlab.lambda_conn import (ModuliChart, build_forms, cstar_act, darboux_from_forms, dA_matrix,
                                moment, project_to_level, random_point, validate_chart)
from sovlab.scenario import rng_from_seed
from sovlab.schwarzian import classify_point
from sovlab.selftest import random_frame, random_local_connection
from sovlab.series import LocalSeries

# q for a = 0.3+0.2i + 0.4t, b = 1-0.5i, c = t + 0.7t^2, lam = 1.3 (computer-algebra oracle)
Q_FROZEN = [-1.2675, -0.2015 + 0.26j, 0.015975 + 0.062j, -0.48743 + 0.2126j,
            -1.69112575 + 0.43918j, 0.79481675 - 0.062426j]


def frozen_connection(n=12):
    pad = lambda c: np.array(c + [0] * (n - len(c)), complex)
    return LocalConnection(LocalSeries(pad([0.3 + 0.2j, 0.4]), 0), LocalSeries(pad([1 - 0.5j]), 0),
                           LocalSeries(pad([0, 1, 0.7]), 0), 1.3)


def test_potential_frozen():
    q = potential_from_abc(frozen_connection())
    assert q.val == -2
    np.testing.assert_allclose(q.window(-2, 4), Q_FROZEN, atol=1e-12)
    # t^-1 coefficient is lam nu_l, t^0 is -nu_l^2
    nu = -0.155 + 0.2j
    assert abs(q.coeff(-1) - 1.3 * nu) < 1e-13 and abs(q.coeff(0) + nu * nu) < 1e-13


def test_potential_reduces_to_determinant_at_lam_zero():
    lc = random_local_connection(rng_from_seed(5), lam=0.0, c_val=0)
    q = potential_from_abc(lc)
    det = -(lc.a * lc.a + lc.b * lc.c)
    np.testing.assert_allclose(q.window(0, 8), det.window(0, 8), atol=1e-12)


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([1.0, 0.4 - 0.8j, 2.0 + 1j]))
@settings(max_examples=25, deadline=None)
def test_gauge_invariance(seed, lam):
    rng = rng_from_seed(seed)
    lc = random_local_connection(rng, lam=lam)
    s, t = random_frame(rng, 14)
    q1 = potential_from_abc(lc)
    q2 = potential_from_abc(gauge_transform(lc, s, t))
    k = min(q1.prec, q2.prec) - 1
    sc = max(1.0, float(np.max(np.abs(q1.window(-2, k)))))
    assert np.max(np.abs(q1.window(-2, k) - q2.window(-2, k))) <= 1e-9 * sc


def test_gauge_sign_mutation_detected():
    rng = rng_from_seed(9)
    lc = random_local_connection(rng, lam=1.0)
    s, t = random_frame(rng, 14)
    q1 = potential_from_abc(lc, sign=-1.0)
    q2 = potential_from_abc(gauge_transform(lc, s, t), sign=-1.0)
    assert np.max(np.abs(q1.window(-2, 6) - q2.window(-2, 6))) > 1e-3


def test_moment_and_cstar(chart, point):
    assert abs(moment(point) - chart.lam_d) <= chart.tol.moment_tol(chart.lam_d)
    for eps in (2.0, 0.3 - 1j):
        assert abs(moment(cstar_act(eps, point)) - moment(point)) < 1e-12
    with pytest.raises(PreconditionError):
        cstar_act(0, point)
    p0 = project_to_level(chart, point, target=0.0)
    assert abs(moment(p0)) < 1e-12


def test_interpolation_and_residues(chart, point):
    f = build_forms(chart, point)
    np.testing.assert_allclose([f.omega_plus.evaluate(p) for p in chart.p], point.k, atol=1e-10)
    allp = list(chart.q) + list(chart.qcheck) + list(chart.p)
    for qi in chart.q:
        assert abs(residue(f.omega0, qi) - chart.lam) < 1e-10
    for qc in chart.qcheck:
        assert abs(residue(f.omega0, qc) + chart.lam) < 1e-10
    assert abs(sum(residue(f.omega0, p) for p in allp)) < 1e-9


def test_moment_obstruction(chart, point):
    with pytest.raises(MomentObstruction):
        build_forms(chart, point.replace(k=point.k * 1.01))


def test_darboux_roundtrip(chart, point):
    f = build_forms(chart, point)
    k, zc, kappa = darboux_from_forms(chart, f)
    np.testing.assert_allclose(k, point.k, atol=1e-10)
    np.testing.assert_allclose(zc, point.zcheck, atol=1e-10)
    np.testing.assert_allclose(dA_matrix(chart) @ kappa, zc, atol=1e-10)


def test_validate_chart(chart):
    diag = validate_chart(chart)
    assert diag["dA_cond"] < 1e10 and diag["spanning_cond"] < 1e10
    bad = ModuliChart(chart.curve, chart.d, chart.lam, chart.q, chart.qcheck, chart.p[:-1], chart.tol)
    with pytest.raises(InvalidChart):
        validate_chart(bad)
    dup = ModuliChart(chart.curve, chart.d, chart.lam, chart.q, chart.qcheck,
                      chart.p[:-1] + (chart.q[0],), chart.tol)
    with pytest.raises(InvalidChart):
        validate_chart(dup)


def test_two_nu_routes_agree(chart, point):
    # closed form on the forms vs classification of the assembled potential
    f = build_forms(chart, point)
    recs = apparent_data(chart, f)
    op = oper_from_forms(chart, f)
    assert len(recs) == chart.m
    for r in recs:
        cl = classify_point(op, r.position)
        assert cl.is_apparent
        assert abs(cl.nu_lambda - r.nu_lambda) <= 1e-8 * max(1.0, abs(r.nu_lambda))


def test_oper_needs_nonzero_lambda(chart0, point0):
    f = build_forms(chart0, point0)
    with pytest.raises(PreconditionError):
        oper_from_forms(chart0, f)


def test_random_point_on_level(chart):
    rng = rng_from_seed(77)
    for _ in range(5):
        pt = random_point(chart, rng)
        assert abs(moment(pt) - chart.lam_d) < 1e-12
