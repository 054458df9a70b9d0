"""Quick property suites run by ``sovlab selftest``.

``mutate=True`` flips the sign of the ``lam g'`` term of the connection-to-oper
formula; the gauge-invariance suite must then fail.
"""
from __future__ import annotations

import numpy as np

from .conn2oper import LocalConnection, apparent_data, gauge_transform, potential_from_abc
from .errors import MomentObstruction
from .instances import default_chart
from .lambda_conn import build_forms, build_omega_plus, build_omega_zero, random_point
from .scenario import rng_from_seed
from .schwarzian import classify_point, mobius_defect, residue_transition, schwarzian, transform_potential
from .series import LocalSeries


def _rand_series(rng, n, val=0, scale=1.0):
    c = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return LocalSeries(c, val)


def random_frame(rng, n, scale=0.5):
    """Random adapted frame (s, t); s(0) is drawn on the annulus 1/2 <= |s(0)| <= 2."""
    s = _rand_series(rng, n, 0, scale)
    s0 = np.exp(rng.uniform(np.log(0.5), np.log(2.0)) + 2j * np.pi * rng.random())
    s = s + (s0 - s.coeff(0))
    t = _rand_series(rng, n, 0, scale)
    return s, t


def random_local_connection(rng, n=14, lam=1.0, c_val=1):
    a = _rand_series(rng, n)
    b = _rand_series(rng, n)
    c = _rand_series(rng, n, 0)
    c = LocalSeries(np.concatenate([np.zeros(c_val, complex), c.coeffs[: n - c_val]]), 0).strip(0.0)
    return LocalConnection(a, b, c, complex(lam))


def random_mobius(rng):
    """(a, b, c, d) with |d| >= |c| / 2 and ad - bc well away from 0."""
    while True:
        a, b, c, d = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        m = max(abs(c), abs(d))
        if abs(d) >= 0.5 * m and abs(a * d - b * c) >= 0.1 * max(abs(a), abs(b)) * m:
            return complex(a), complex(b), complex(c), complex(d)


def suite_schwarzian(mutate=False, seed=0):
    rng = rng_from_seed(seed)
    worst_mob, worst_coc = 0.0, 0.0
    n = 12
    for _ in range(20):
        a, b, c, d = random_mobius(rng)
        worst_mob = max(worst_mob, mobius_defect(a, b, c, d, n))
        f = LocalSeries.variable(n) + _rand_series(rng, n, 2, 0.3)
        g = LocalSeries.variable(n) + _rand_series(rng, n, 2, 0.3)
        lhs = schwarzian(f.compose(g))
        rhs = schwarzian(f).compose(g) * (g.deriv() * g.deriv()) + schwarzian(g)
        k = min(lhs.prec, rhs.prec) - 1
        worst_coc = max(worst_coc, float(np.max(np.abs(lhs.window(0, k) - rhs.window(0, k)))))
    ok = worst_mob < 1e-12 and worst_coc < 1e-9
    return ok, {"mobius": worst_mob, "cocycle": worst_coc}


def suite_gauge(mutate=False, seed=1):
    rng = rng_from_seed(seed)
    sign = -1.0 if mutate else 1.0
    worst = 0.0
    for _ in range(20):
        lc = random_local_connection(rng, lam=1.0 + 0.3j)
        s, t = random_frame(rng, 14)
        q1 = potential_from_abc(lc, sign=sign)
        q2 = potential_from_abc(gauge_transform(lc, s, t), sign=sign)
        k = min(q1.prec, q2.prec) - 1
        lo = min(q1.val, q2.val)
        sc = max(1.0, float(np.max(np.abs(q1.window(lo, k)))))
        worst = max(worst, float(np.max(np.abs(q1.window(lo, k) - q2.window(lo, k)))) / sc)
    return worst <= 1e-9, {"max_rel_dev": worst}


def suite_residue(mutate=False, seed=2):
    mc = default_chart()
    pt = random_point(mc, rng_from_seed(seed))
    wp = build_omega_plus(mc, pt.k, pt.z)
    w0 = build_omega_zero(mc, pt, wp)
    from .field import residue

    pts = list(mc.q) + list(mc.qcheck) + list(mc.p)
    total = abs(sum(residue(w0, p) for p in pts))
    blocked = False
    try:
        build_omega_zero(mc, pt.replace(k=pt.k * 1.01), wp)
    except MomentObstruction:
        blocked = True
    return total <= 1e-9 and blocked, {"residue_sum": total, "obstruction_raised": blocked}


def suite_interpolation(mutate=False, seed=3):
    mc = default_chart()
    pt = random_point(mc, rng_from_seed(seed))
    wp = build_omega_plus(mc, pt.k, pt.z)
    err = float(np.max(np.abs([wp.evaluate(p) - k for p, k in zip(mc.p, pt.k)])))
    return err <= 1e-9 * max(1.0, float(np.max(np.abs(pt.k)))), {"max_err": err}


def suite_classification(mutate=False, seed=4):
    mc = default_chart()
    pt = random_point(mc, rng_from_seed(seed))
    forms = build_forms(mc, pt)
    recs = apparent_data(mc, forms)
    from .conn2oper import CrossedPotential
    from .schwarzian import OperRep

    op = OperRep(mc.lam, CrossedPotential(forms, sign=-1.0 if mutate else 1.0))
    worst = 0.0
    kinds = []
    for r in recs:
        cl = classify_point(op, r.position)
        kinds.append(cl.kind)
        if cl.is_apparent:
            worst = max(worst, abs(cl.nu_lambda - r.nu_lambda))
    # covariance of the residue parameter under a random 2-jet
    rng = rng_from_seed(seed + 100)
    cov = 0.0
    for _ in range(10):
        nu = complex(rng.standard_normal() + 1j * rng.standard_normal())
        z1 = complex(1.0 + 0.3 * (rng.standard_normal() + 1j * rng.standard_normal()))
        z2 = complex(rng.standard_normal() + 1j * rng.standard_normal())
        n = 10
        t = LocalSeries.variable(n)
        q = LocalSeries(np.array([-0.75, nu, -nu * nu] + [0.0] * (n - 3), complex), -2)
        change = t * z1 + t * t * (z2 / 2)
        qb = transform_potential(q, change, 1.0)
        # express in the new variable to read its t^-1 coefficient
        inv = change.reversion()
        qn = qb.compose(inv)
        cov = max(cov, abs(qn.coeff(-1) - residue_transition(nu, (z1, z2), 1.0)[0]))
    ok = all(k == "apparent" for k in kinds) and worst <= 1e-8 and cov <= 1e-8
    return ok, {"kinds": kinds, "nu_mismatch": worst, "covariance": cov}


SUITES = {
    "schwarzian": suite_schwarzian,
    "gauge": suite_gauge,
    "residue": suite_residue,
    "interpolation": suite_interpolation,
    "classification": suite_classification,
}


def run(names=None, mutate=False) -> dict:
    names = list(SUITES) if not names else names
    out = {}
    for nm in names:
        ok, info = SUITES[nm](mutate=mutate)
        out[nm] = {"passed": bool(ok), **info}
    return out
