"""From lambda-connections to opers: the crossed potential and apparent data.

For a local connection ``lam d + [[a, b], [c, -a]]`` in a frame adapted to
the sub-line bundle, the gauge-invariant potential is

    q = -(b c + g^2 + lam g'),   g = a - (lam / 2) c'/c,

so that ``lam^2 d^2 + q`` is the induced Schroedinger operator.  At a simple
zero of ``c`` the expansion is ``-3 lam^2 / (4 t^2) + lam nu_l / t - nu_l^2 + O(t)``
with ``nu_l = a - lam c'' / (4 c')``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .curve import CurvePoint
from .errors import DegenerateInput, PreconditionError, SeriesError
from .lambda_conn import ConnectionForms, ModuliChart
from .schwarzian import ApparentSingularity, OperRep, classify_point, from_chart
from .series import LocalSeries
from .zeros import chart_radius, scaled_valuation, zeros


@dataclass(frozen=True)
class LocalConnection:
    a: LocalSeries
    b: LocalSeries
    c: LocalSeries
    lam: complex


def potential_from_abc(lc: LocalConnection, c_val: int | None = None, sign: float = 1.0) -> LocalSeries:
    """Gauge-invariant potential of a local connection.

    ``c_val`` forces the valuation of ``c`` (leading coefficients below it are
    treated as round-off).  ``sign`` multiplies the ``lam g'`` term and exists
    only for mutation testing.
    """
    a, b, c, lam = lc.a, lc.b, lc.c, lc.lam
    if not np.any(c.coeffs != 0):
        raise SeriesError("c vanishes identically")
    if c_val is not None and c_val > c.val:
        c = LocalSeries(c.coeffs[c_val - c.val:], c_val, c.anchor)
    else:
        c = c.strip(0.0)
    dc = c.deriv()
    r = dc / c
    g = a - (0.5 * lam) * r
    return -(b * c + g * g + (sign * lam) * g.deriv())


def gauge_transform(lc: LocalConnection, s: LocalSeries, t: LocalSeries) -> LocalConnection:
    """Frame change by G = [[s, t], [0, 1/s]]: A -> G A G^-1 - lam dG G^-1."""
    if not np.any(s.coeffs != 0):
        raise SeriesError("s vanishes identically")
    a, b, c, lam = lc.a, lc.b, lc.c, lc.lam
    si = 1 / s
    ds, dt = s.deriv(), t.deriv()
    a2 = a + t * c * si - lam * ds * si
    b2 = s * s * b - 2 * s * t * a - t * t * c + lam * (ds * t - s * dt)
    c2 = c * si * si
    return LocalConnection(a2, b2, c2, lam)


def local_connection(forms: ConnectionForms, pt: CurvePoint, order: int) -> LocalConnection:
    """(a, b, c) = (w0, w-, w+) / dt in the standard chart at ``pt``."""
    if forms.omega_minus is None:
        raise PreconditionError("w- missing")
    return LocalConnection(forms.omega0.expand_at(pt, order), forms.omega_minus.expand_at(pt, order),
                           forms.omega_plus.expand_at(pt, order), forms.lam)


class CrossedPotential:
    """The x-chart potential Q of the oper induced by a triple of forms (evaluated lazily)."""

    def __init__(self, forms: ConnectionForms, zero_points=(), sign: float = 1.0, tol=DEFAULT_TOL):
        self.forms = forms
        self.curve = forms.omega0.curve
        self.lam = forms.lam
        self.zero_points = tuple(zero_points)
        self.sign = sign
        self.tol = tol

    def chart_potential(self, pt: CurvePoint, order: int = 8) -> LocalSeries:
        n = order + 4
        lc = local_connection(self.forms, pt, n)
        rho = chart_radius(self.curve, pt)
        cv = scaled_valuation(lc.c, rho, self.tol.valuation)
        return potential_from_abc(lc, c_val=cv, sign=self.sign).truncate(order)

    def expand_at(self, pt: CurvePoint, order: int = 8) -> LocalSeries:
        q = self.chart_potential(pt, order + 2)
        if pt.kind == "generic":
            return q.truncate(order)
        return from_chart(q, self.curve, pt, self.lam, order).truncate(order)


def omega_plus_zeros(mc: ModuliChart, forms: ConnectionForms, z=None, tol: Tolerances = DEFAULT_TOL):
    """Zeros of w+ other than the forced double zeros on q, as (point, multiplicity)."""
    qs = mc.q_points(forms.z if z is None else z)
    zs = zeros(forms.omega_plus, tol, exclude=[(qi, 2) for qi in qs])
    return [(p, m) for p, m in zs if p not in qs]


def apparent_data(mc: ModuliChart, forms: ConnectionForms, z=None, tol: Tolerances = DEFAULT_TOL,
                  zero_list=None) -> list[ApparentSingularity]:
    """nu_l = w0(u) - lam w+''(u) / (4 w+'(u)) at each simple zero u of w+."""
    lam = forms.lam
    zl = omega_plus_zeros(mc, forms, z, tol) if zero_list is None else zero_list
    out = []
    for p, m in zl:
        if m != 1:
            raise DegenerateInput(f"w+ has a zero of order {m} at {p}; only simple zeros are supported")
        a = forms.omega0.expand_at(p, 3)
        c = forms.omega_plus.expand_at(p, 4)
        c1, c2 = c.coeff(1), c.coeff(2)
        a0 = a.coeff(0)
        if a.val < 0 and np.max(np.abs(a.window(a.val, 0))) > 1e-8 * max(1.0, abs(a0)):
            raise DegenerateInput(f"w0 has a pole at the zero {p} of w+")
        nul = a0 - lam * (2 * c2) / (4 * c1)
        out.append(ApparentSingularity.make(p, complex(nul), lam))
    out.sort(key=lambda s: s.position.sort_key())
    return out


def oper_from_forms(mc: ModuliChart, forms: ConnectionForms, z=None, tol: Tolerances = DEFAULT_TOL,
                    classify: bool = True, sign: float = 1.0) -> OperRep:
    if forms.lam == 0:
        raise PreconditionError("oper_from_forms needs lambda != 0")
    if forms.omega_plus.is_zero():
        raise PreconditionError("w+ vanishes identically")
    zl = omega_plus_zeros(mc, forms, z, tol)
    bad = [(p, m) for p, m in zl if m != 1]
    if bad:
        raise DegenerateInput(f"non-simple zeros of w+: {bad}")
    pot = CrossedPotential(forms, [p for p, _ in zl], sign=sign, tol=tol)
    op = OperRep(forms.lam, pot, [])
    if classify:
        decl = []
        for p, _ in zl:
            cl = classify_point(op, p, tol)
            if not cl.is_apparent:
                raise DegenerateInput(f"zero {p} of w+ does not classify as apparent: {cl}")
            decl.append(ApparentSingularity.make(p, cl.nu_lambda, forms.lam))
        decl.sort(key=lambda s: s.position.sort_key())
        op.declared_singularities = decl
    return op
