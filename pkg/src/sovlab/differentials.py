"""Riemann-Roch spaces of (quadratic) differentials with prescribed Laurent data.

Every space is realized inside an explicit spanning set

* abelian:    (A(xi) y + B(xi) f) / (f D) dx,  deg A <= g-1+deg D, deg B <= deg D-2
* quadratic:  (A(xi) + B(xi) y) / (f D) dx^2,  deg A <= 2g-2+deg D, deg B <= g-3+deg D

where ``D = prod (x - x(P))^{M}`` collects the x-values of the allowed poles.
The degree bounds give regularity at branch points and infinity; poles at
the unwanted conjugate points are removed by extra linear conditions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .curve import CurvePoint, HyperellipticCurve
from .errors import InconsistentSystem, PreconditionError
from .field import Differential, FieldElem
from .scalar import DTYPE
from .series import LocalSeries


@dataclass(frozen=True)
class DivisorSpec:
    """Finite formal sum of points; positive entries are poles, negative ones forced zeros."""

    items: tuple = ()

    def __post_init__(self):
        pts = [p for p, _ in self.items]
        if len(set(pts)) != len(pts):
            raise PreconditionError("divisor support must be pairwise distinct")
        if any(m == 0 for _, m in self.items):
            raise PreconditionError("divisor multiplicities must be nonzero")

    @classmethod
    def of(cls, points: Iterable[CurvePoint], mult: int = 1) -> "DivisorSpec":
        return cls(tuple((p, int(mult)) for p in points))

    def __add__(self, other: "DivisorSpec") -> "DivisorSpec":
        d: dict = {}
        for p, m in self.items + other.items:
            d[p] = d.get(p, 0) + m
        return DivisorSpec(tuple((p, m) for p, m in d.items() if m))

    def __neg__(self):
        return DivisorSpec(tuple((p, -m) for p, m in self.items))

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    @property
    def degree(self) -> int:
        return sum(m for _, m in self.items)

    def points(self) -> list[CurvePoint]:
        return [p for p, _ in self.items]


@dataclass(frozen=True)
class Condition:
    """Coefficient of ``t**exponent`` in the standard chart at ``point`` equals ``value``."""

    point: CurvePoint
    exponent: int
    value: complex = 0.0


def residue_condition(pt, value) -> Condition:
    return Condition(pt, -1, value)


def constant_condition(pt, value) -> Condition:
    return Condition(pt, 0, value)


def vanishing_conditions(pt, order: int) -> list[Condition]:
    """Vanish to order >= ``order`` at ``pt``."""
    return [Condition(pt, k, 0.0) for k in range(order)]


@dataclass
class SpanningSet:
    curve: HyperellipticCurve
    degree: int
    den: tuple          # (x-value, M) pairs of D
    nA: int
    nB: int

    @property
    def size(self) -> int:
        return self.nA + self.nB

    def full_den(self) -> tuple:
        d = dict(self.den)
        for b in self.curve.branch_points:
            d[complex(b)] = d.get(complex(b), 0) + 1
        return tuple(d.items())

    def element(self, coef: np.ndarray) -> Differential:
        c = self.curve
        alpha = np.asarray(coef[: self.nA], dtype=DTYPE)
        beta = np.asarray(coef[self.nA:], dtype=DTYPE)
        if self.degree == 1:
            a = np.polynomial.polynomial.polymul(beta, c.f_xi) if beta.size else np.zeros(1)
            fe = FieldElem(c, a, alpha, self.full_den())
        else:
            fe = FieldElem(c, alpha, beta if beta.size else None, self.full_den())
        return Differential(fe, self.degree)

    def unit_series(self, pt: CurvePoint, n: int):
        """(U_A, U_B, Xi): element_i = Xi^i U_A (A-part), Xi^j U_B (B-part)."""
        c = self.curve
        dinv_f = c.den_inv_series(self.full_den(), 1.0, pt, n)
        y = c.chart_y(pt, n)
        dxdt = c.chart_dxdt(pt, n)
        if self.degree == 2:
            dxdt = dxdt * dxdt
        base = dinv_f * dxdt
        if self.degree == 1:
            UA = base * y
            UB = c.den_inv_series(self.den, 1.0, pt, n) * c.chart_dxdt(pt, n)
        else:
            UA = base
            UB = base * y
        xi = c.poly_series([0.0, 1.0], pt, n)
        return UA, UB, xi

    def rows(self, pt: CurvePoint, exponents: Sequence[int]) -> np.ndarray:
        """Matrix of Laurent coefficients: rows = exponents, columns = spanning elements."""
        exps = list(exponents)
        if not exps:
            return np.zeros((0, self.size), dtype=DTYPE)
        kmax = max(exps)
        # lowest possible valuation among elements, bounded by chart valuations
        n0 = 4
        UA, UB, xi = self.unit_series(pt, n0)
        vmin = min(UA.val, UB.val) + min(0, xi.val) * max(self.nA, self.nB)
        n = max(kmax - vmin + 2, 2)
        UA, UB, xi = self.unit_series(pt, n)
        out = np.zeros((len(exps), self.size), dtype=DTYPE)
        pw = LocalSeries.constant(1.0, n, pt)
        for i in range(max(self.nA, self.nB)):
            if i < self.nA:
                s = pw * UA
                out[:, i] = [s.coeff(k) for k in exps]
            if i < self.nB:
                s = pw * UB
                out[:, self.nA + i] = [s.coeff(k) for k in exps]
            pw = pw * xi
        return out


def spanning_set(curve: HyperellipticCurve, poles: DivisorSpec, degree: int = 1) -> SpanningSet:
    M: dict = {}
    for p, m in poles:
        if m <= 0:
            continue
        if p.kind != "generic":
            raise PreconditionError("poles are supported at generic points only")
        M[p.x0] = max(M.get(p.x0, 0), m)
    degD = sum(M.values())
    g = curve.genus
    if degree == 1:
        nA, nB = g + degD, max(degD - 1, 0)
    elif degree == 2:
        nA, nB = 2 * g - 1 + degD, max(g - 2 + degD, 0)
    else:
        raise PreconditionError("degree must be 1 or 2")
    den = tuple(sorted(M.items(), key=lambda rm: (rm[0].real, rm[0].imag)))
    return SpanningSet(curve, degree, den, nA, nB)


def structural_conditions(curve, poles: DivisorSpec) -> dict:
    """Point -> exponents forced to vanish by the pole/zero pattern of ``poles``."""
    allowed = {p: -m for p, m in poles}  # lowest allowed exponent
    M: dict = {}
    for p, m in poles:
        if m > 0:
            M[p.x0] = max(M.get(p.x0, 0), m)
    out: dict = {}
    # every fibre of D: both sheets
    fibre_pts = {}
    for p, m in poles:
        if m > 0:
            lst = fibre_pts.setdefault(p.x0, [])
            for q in (p, curve.conjugate(p)):
                if q not in lst:
                    lst.append(q)
    for x0, pts in fibre_pts.items():
        for pt in pts:
            lo = allowed.get(pt, 0)
            ex = list(range(-M[x0], lo))
            if ex:
                out[pt] = out.get(pt, []) + ex
    for p, m in poles:
        if m < 0 and p not in out:
            out[p] = list(range(0, -m))
    return out


@dataclass
class DifferentialSolution:
    """One solution plus a basis of the homogeneous solution space."""

    diff: Differential
    homogeneous: list = field(default_factory=list)
    residual: float = 0.0
    singular_values: np.ndarray | None = None
    coef: np.ndarray | None = None
    span: SpanningSet | None = None

    def __iter__(self):
        yield self.diff
        yield self.homogeneous


def assemble(curve, poles: DivisorSpec, conditions: Sequence[Condition], degree: int = 1):
    """Spanning set, condition matrix and right-hand side."""
    span, Mtx, rhs, _ = assemble_labeled(curve, poles, conditions, degree)
    return span, Mtx, rhs


def assemble_labeled(curve, poles: DivisorSpec, conditions: Sequence[Condition], degree: int = 1):
    """As :func:`assemble`, plus the (point, exponent) label of every row."""
    span = spanning_set(curve, poles, degree)
    groups: dict = {}
    for pt, exps in structural_conditions(curve, poles).items():
        groups.setdefault(pt, []).extend((k, 0.0) for k in exps)
    for c in conditions:
        groups.setdefault(c.point, []).append((c.exponent, complex(c.value)))
    rows, rhs, labels = [], [], []
    for pt, lst in groups.items():
        R = span.rows(pt, [k for k, _ in lst])
        rows.append(R)
        rhs.extend(v for _, v in lst)
        labels.extend((pt, k) for k, _ in lst)
    Mtx = np.vstack(rows) if rows else np.zeros((0, span.size), dtype=DTYPE)
    return span, Mtx, np.asarray(rhs, dtype=DTYPE), labels


def solve_system(Mtx, rhs, tol: Tolerances = DEFAULT_TOL, homogeneous: bool = True):
    """Minimum-norm least-squares solution, residual and null space, via SVD.

    Rows and columns are equilibrated first: rows from different points carry
    very different powers of their local scale.
    """
    ncol = Mtx.shape[1]
    if Mtx.shape[0] == 0:
        return np.zeros(ncol, dtype=DTYPE), 0.0, np.eye(ncol, dtype=DTYPE), np.zeros(0)
    rn = np.linalg.norm(Mtx, axis=1)
    rn[rn == 0] = 1.0
    A = Mtx / rn[:, None]
    cn = np.linalg.norm(A, axis=0)
    cn[cn == 0] = 1.0
    A = A / cn
    U, s, Vh = np.linalg.svd(A, full_matrices=True)
    smax = s[0] if s.size else 0.0
    r = int(np.sum(s > tol.rank * smax)) if smax > 0 else 0
    Ub = U[:, :r].conj().T @ (rhs / rn)
    xs = Vh[:r].conj().T @ (Ub / s[:r])
    x = xs / cn
    res = float(np.linalg.norm(Mtx @ x - rhs))
    null = (Vh[r:].conj().T / cn[:, None]) if homogeneous else None
    return x, res, null, s


def constrained_differential(curve: HyperellipticCurve, poles: DivisorSpec,
                             conditions: Sequence[Condition] = (), degree: int = 1,
                             tol: Tolerances = DEFAULT_TOL) -> DifferentialSolution:
    """Differential with poles bounded by ``poles`` and prescribed Laurent coefficients.

    Returns one solution and a basis of the homogeneous solution space.
    Raises :class:`InconsistentSystem` when the least-squares residual shows
    that no such differential exists.
    """
    span, Mtx, rhs = assemble(curve, poles, conditions, degree)
    x, res, null, s = solve_system(Mtx, rhs, tol)
    mnorm = float(np.linalg.norm(Mtx, 2)) if Mtx.size else 0.0
    scale = max(mnorm * float(np.linalg.norm(x)), float(np.linalg.norm(rhs)), 1e-300)
    if res > tol.lin * scale:
        raise InconsistentSystem(f"no such differential: residual {res:.3e}", residual=res)
    hom = [span.element(null[:, j]) for j in range(null.shape[1])]
    return DifferentialSolution(span.element(x), hom, res, s, x, span)


def holomorphic_basis(curve: HyperellipticCurve) -> list[Differential]:
    """x^i dx / y, i = 0..g-1."""
    y = FieldElem.y(curve)
    yinv = y.inverse()
    out = []
    for i in range(curve.genus):
        xi = FieldElem.from_x_poly(curve, [0.0] * i + [1.0])
        out.append(Differential(xi * yinv, 1))
    return out


def quadratic_basis(curve: HyperellipticCurve) -> list[Differential]:
    """x^i dx^2/y^2 (i = 0..2g-2) and x^j dx^2/y (j = 0..g-3)."""
    g = curve.genus
    if g < 3:
        raise PreconditionError("quadratic_basis assumes g >= 3")
    fden = tuple((complex(b), 1) for b in curve.branch_points)
    out = []
    for i in range(2 * g - 1):
        out.append(Differential(FieldElem.from_x_poly(curve, [0.0] * i + [1.0], den=fden, scale=curve.lead), 2))
    for j in range(g - 2):
        out.append(Differential(FieldElem.from_x_poly(curve, [0.0], [0.0] * j + [1.0], den=fden,
                                                      scale=curve.lead), 2))
    return out
