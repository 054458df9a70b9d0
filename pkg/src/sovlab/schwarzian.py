"""Schwarzian calculus, projective-structure potentials and apparent singularities.

An oper is stored as one global potential ``Q`` read in x-charts, so the
local operator on each sheet is ``lam^2 d_x^2 + Q``.  In the standard chart
``t`` at a point the potential is obtained by the transport law

    q_t = Q(x(t)) x'(t)^2 + (lam^2 / 2) {x, t}.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .curve import CurvePoint
from .errors import PreconditionError, SeriesError
from .field import Differential, FieldExpr
from .series import LocalSeries


def schwarzian(g: LocalSeries) -> LocalSeries:
    """{g, t} = g'''/g' - (3/2) (g''/g')^2."""
    g1 = g.deriv()
    if not np.any(g1.coeffs != 0):
        raise SeriesError("g' vanishes to truncation order")
    g1 = g1.strip(0.0)
    g2 = g1.deriv()
    g3 = g2.deriv()
    r = g2 / g1
    return g3 / g1 - 1.5 * (r * r)


def mobius_defect(a, b, c, d, n: int = 12) -> float:
    """Relative size of the Schwarzian of M = (a t + b)/(c t + d) against its g3/g1 term (0 exactly)."""
    if d == 0:
        raise PreconditionError("Moebius map with a pole at t = 0")
    if a * d - b * c == 0:
        raise PreconditionError("degenerate Moebius map")
    t = LocalSeries.variable(n)
    g = (t * a + b) / (t * c + d)
    s = schwarzian(g)
    g1 = g.deriv()
    ref = float(np.max(np.abs((g1.deriv().deriv() / g1).coeffs)))
    return float(np.max(np.abs(s.coeffs))) / max(ref, 1e-300)


def transform_potential(q_src: LocalSeries, change: LocalSeries, lam) -> LocalSeries:
    """Potential of the target chart, pulled back as a series in the source variable.

    ``change`` is z_b(z_a).  Returns ``q_b(z_b(z_a))`` from
    ``q_b(z_b) (z_b')^2 = q_a(z_a) - (lam^2/2) {z_b, z_a}``.
    """
    d = change.deriv()
    if not np.any(d.coeffs != 0):
        raise SeriesError("chart change is not invertible (z' vanishes identically)")
    corr = schwarzian(change) * (0.5 * lam * lam)
    d2 = d.strip(0.0)
    return (q_src - corr) / (d2 * d2)


def pull_potential(q_dst_on_src: LocalSeries, change: LocalSeries, lam) -> LocalSeries:
    """Inverse of :func:`transform_potential`: q_a = q_b(z_b) (z_b')^2 + (lam^2/2) {z_b, z_a}."""
    d = change.deriv().strip(0.0)
    return q_dst_on_src * (d * d) + schwarzian(change) * (0.5 * lam * lam)


@dataclass(frozen=True)
class ApparentSingularity:
    """Apparent singularity ``-3/(4t^2) + nu/t + q0 + O(t)`` with ``nu^2 + q0 = 0``."""

    position: CurvePoint
    chart: str
    nu: complex
    nu_lambda: complex
    order: int = 1

    @classmethod
    def make(cls, position, nu_lambda, lam):
        nu = nu_lambda / lam if lam != 0 else complex("nan")
        return cls(position, position.chart, complex(nu), complex(nu_lambda), 1)


@dataclass
class OperRep:
    """``lam^2 d_x^2 + Q`` with ``Q`` any object supporting ``expand_at(pt, order)``."""

    lam: complex
    potential: object
    declared_singularities: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def curve(self):
        return self.potential.curve

    def chart_potential(self, pt: CurvePoint, order: int = 8) -> LocalSeries:
        """q_t in the standard chart at ``pt``."""
        fn = getattr(self.potential, "chart_potential", None)
        if fn is not None:
            return fn(pt, order)
        Q = self.potential.expand_at(pt, order)
        if pt.kind == "generic":
            return Q
        return to_chart(Q, self.curve, pt, self.lam, order)


def to_chart(Qx: LocalSeries, curve, pt, lam, order) -> LocalSeries:
    """x-chart potential (as a series in t) -> potential of the chart t."""
    xt = curve.chart_x(pt, order + 4)
    return pull_potential(Qx, xt, lam)


def from_chart(qt: LocalSeries, curve, pt, lam, order) -> LocalSeries:
    """Potential of the chart t -> x-chart potential as a series in t."""
    xt = curve.chart_x(pt, order + 4)
    return transform_potential(qt, xt, lam)


@dataclass
class Classification:
    kind: str                    # "regular" | "apparent" | "non_apparent"
    nu: complex | None = None
    nu_lambda: complex | None = None
    coeffs: dict = field(default_factory=dict)
    defect: float = 0.0

    @property
    def is_apparent(self) -> bool:
        return self.kind == "apparent"


def natural_radius(s: LocalSeries) -> float:
    """Largest rho <= 1 with |c_e| rho^e <= max_{e' <= 0} |c_e'| for all e > 0."""
    k = np.arange(s.val, s.prec)
    mags = np.abs(s.coeffs)
    low = float(mags[k <= 0].max()) if np.any(k <= 0) else 0.0
    if low == 0.0:
        return 1.0
    rho = 1.0
    for e, m in zip(k, mags):
        if e > 0 and m > low:
            rho = min(rho, (low / m) ** (1.0 / e))
    return rho


def classify_series(q: LocalSeries, lam, tol: Tolerances = DEFAULT_TOL, rho: float | None = None) -> Classification:
    """Classify a chart potential by its Laurent pattern.

    ``rho`` is a natural radius of the chart used to put coefficients of
    different exponents on the same footing for "numerically zero" decisions;
    ``None`` estimates it from the growth of the coefficients.
    """
    if lam == 0:
        raise PreconditionError("classification is undefined at lambda = 0")
    s = q / (lam * lam)
    if rho is None:
        rho = natural_radius(s)
    lo = s.val
    k = np.arange(s.val, s.prec)
    mags = np.abs(s.coeffs) * rho ** k.astype(float)
    scale = max(float(mags.max()), 1e-300)
    neg = [(int(e), complex(c)) for e, c, m in zip(k, s.coeffs, mags) if e < 0 and m > tol.valuation * scale]
    if not neg:
        return Classification("regular", coeffs={0: s.coeff(0)})
    lowest = min(e for e, _ in neg)
    c = {e: s.coeff(e) for e in range(min(lowest, -2), 1)}
    if lowest < -2:
        return Classification("non_apparent", coeffs=c, defect=float("inf"))
    c2 = c.get(-2, 0j)
    ref = 0.75
    if abs(c2 + 0.75) > tol.apparent * ref:
        return Classification("non_apparent", coeffs=c, defect=abs(c2 + 0.75))
    nu = c[-1]
    q0 = c[0]
    defect = abs(nu * nu + q0)
    if defect > tol.apparent * max(abs(c2), 1.0) * max(1.0, abs(nu) ** 2):
        return Classification("non_apparent", coeffs=c, defect=defect)
    return Classification("apparent", nu=complex(nu), nu_lambda=complex(lam * nu), coeffs=c, defect=defect)


def classify_point(op: OperRep, pt: CurvePoint, tol: Tolerances = DEFAULT_TOL, order: int = 8) -> Classification:
    """regular / apparent(nu, nu_lambda) / non_apparent at ``pt`` in its standard chart."""
    if op.lam == 0:
        raise PreconditionError("classification is an oper notion; lambda = 0 rejected")
    from .zeros import chart_radius

    q = op.chart_potential(pt, order)
    return classify_series(q, op.lam, tol, chart_radius(op.curve, pt))


def residue_transition(nu_src: complex, jet: tuple, lam) -> tuple[complex, complex]:
    """nu_a = nu_b / z' + (3/4) z'' / z'^2 for z_a(z_b) with 2-jet (z', z'')."""
    z1, z2 = jet
    if z1 == 0:
        raise PreconditionError("chart change with z' = 0")
    nu = nu_src / z1 + 0.75 * z2 / (z1 * z1)
    return complex(nu), complex(lam * nu)


def oper_diff(op1: OperRep, op2: OperRep) -> Differential:
    """(Q1 - Q2) dx^2; a genuine quadratic differential when the lambdas agree."""
    if op1.lam != op2.lam:
        raise PreconditionError("oper_diff needs equal lambda")
    expr = FieldExpr.wrap(op1.potential) - FieldExpr.wrap(op2.potential)
    return Differential(expr, 2)


def sample_points(curve, count: int = 12, seed: int = 7, avoid=()):
    """Deterministic generic sample points away from branch points and ``avoid``."""
    rng = np.random.Generator(np.random.Philox(seed))
    pts = []
    xs_avoid = [p.x0 for p in avoid if getattr(p, "x0", None) is not None]
    while len(pts) < count:
        p = curve.random_point(rng, scale=curve.radius, margin=0.2)
        if all(abs(p.x0 - a) > 0.2 for a in xs_avoid):
            pts.append(p)
    return pts


def oper_diff_norm(op1: OperRep, op2: OperRep, points=None) -> float:
    """Relative sample norm ||Q1 - Q2|| / ||Q1|| over generic sample points."""
    d = oper_diff(op1, op2)
    if points is None:
        avoid = [s.position for s in op1.declared_singularities + op2.declared_singularities]
        points = sample_points(op1.curve, avoid=avoid)
    num = np.array([d.evaluate(p) for p in points])
    den = np.array([FieldExpr.wrap(op1.potential).evaluate(p) for p in points])
    return float(np.linalg.norm(num) / max(np.linalg.norm(den), 1e-300))
