"""Opers with prescribed apparent singularities.

Given a reduced divisor ``u = u_1 + ... + u_m`` and residue parameters
``nu_n``, the oper is

    Q = B + lam^2 (-(3/4) sum q2_n + sum nu_n q1_n + q0 + dq) / dx^2

with ``B`` a fixed regular background potential, ``q2_n`` / ``q1_n`` the
building-block quadratic differentials with tails ``t^-2`` / ``t^-1`` at
``u_n``, ``q0`` holomorphic and fixed by the linear conditions that make the
0-th coefficient at ``u_n`` equal ``-nu_n^2``, and ``dq`` a free element of
the space of holomorphic quadratic differentials vanishing on ``u``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .config import DEFAULT_TOL, Tolerances
from .curve import CurvePoint, HyperellipticCurve
from .differentials import DivisorSpec, quadratic_basis, solve_system
from .errors import NumericalError, PreconditionError, QSpecialError
from .field import Differential, FieldElem, FieldExpr
from .scalar import DTYPE
from .schwarzian import ApparentSingularity, OperRep


@dataclass
class QGenericity:
    generic: bool
    dim: int          # dim Q_u
    expected: int     # max(0, 3g - 3 - deg u)
    rank: int
    basis: list = field(default_factory=list)
    singular_values: np.ndarray | None = None

    @property
    def kind(self) -> str:
        return "generic" if self.generic else "special"


def _as_divisor(u) -> DivisorSpec:
    if isinstance(u, DivisorSpec):
        return u
    return DivisorSpec.of(list(u))


def evaluation_matrix(curve: HyperellipticCurve, u: DivisorSpec, basis=None) -> np.ndarray:
    """Rows (u_n, k < mult_n) of the Taylor coefficients of the quadratic basis."""
    basis = quadratic_basis(curve) if basis is None else basis
    rows = []
    for p, m in u:
        if m <= 0:
            raise PreconditionError("u must be effective")
        ser = [b.expand_at(p, m + 1) for b in basis]
        for k in range(m):
            rows.append([s.coeff(k) for s in ser])
    return np.array(rows, dtype=DTYPE).reshape(len(rows), len(basis))


def q_genericity(curve: HyperellipticCurve, u, tol: Tolerances = DEFAULT_TOL) -> QGenericity:
    """dim of Q_u = {holomorphic quadratic differentials vanishing on u} versus its expected value."""
    u = _as_divisor(u)
    basis = quadratic_basis(curve)
    n = len(basis)
    E = evaluation_matrix(curve, u, basis)
    expected = max(0, n - u.degree)
    if E.shape[0] == 0:
        return QGenericity(True, n, n, 0, basis, np.zeros(0))
    cn = np.linalg.norm(E, axis=0)
    cn[cn == 0] = 1.0
    rn = np.linalg.norm(E, axis=1)
    rn[rn == 0] = 1.0
    A = E / cn / rn[:, None]
    _, s, Vh = np.linalg.svd(A, full_matrices=True)
    rank = int(np.sum(s > tol.rank * s[0])) if s.size and s[0] > 0 else 0
    dim = n - rank
    null = Vh[rank:].conj().T / cn[:, None]
    qb = []
    for j in range(null.shape[1]):
        coef = null[:, j]
        qb.append(_combine(basis, coef))
    return QGenericity(dim == expected, dim, expected, rank, qb, s)


def _combine(diffs, coef) -> Differential:
    acc = None
    for d, c in zip(diffs, coef):
        if c == 0:
            continue
        term = d.coeff * FieldElem.const(d.curve, complex(c))
        acc = term if acc is None else acc + term
    if acc is None:
        acc = FieldElem.const(diffs[0].curve, 0.0)
    return Differential(acc, diffs[0].degree)


def local_pole_pair(curve: HyperellipticCurve, p: CurvePoint) -> tuple[FieldElem, FieldElem]:
    """Quadratic differentials with a pole only at ``p``: orders 1 and 2, unit leading tails.

    (y + y_p) / (x - x_p) and (y + y_p + y'_p (x - x_p)) / (x - x_p)^2, times
    dx^2 / y^2.  The numerators vanish on the conjugate point to the needed
    order, and dx^2 / y^2 absorbs the pole at infinity.  Both are written over
    the common denominator (x - x_p)^2 f.
    """
    if p.kind != "generic":
        raise PreconditionError("local poles need a generic point")
    x0, y0 = p.x0, p.y0
    dy = curve.chart_y(p, 3).coeff(1)
    den = ((x0, 2),) + tuple((complex(b), 1) for b in curve.branch_points)
    # (x - x0) (y + y0) and y + y0 + dy (x - x0), normalised by y0 / 2
    a1 = P.polymul([-x0, 1.0], [y0]) * (y0 / 2)
    b1 = np.array([-x0, 1.0]) * (y0 / 2)
    a2 = np.array([y0 - dy * x0, dy]) * (y0 / 2)
    b2 = np.array([1.0]) * (y0 / 2)
    e1 = FieldElem.from_x_poly(curve, a1, b1, den, curve.lead)
    e2 = FieldElem.from_x_poly(curve, a2, b2, den, curve.lead)
    return e1, e2


@dataclass
class BuildingBlocks:
    """q2[n], q1[n] for every point of u, in the basis (holomorphic, local poles)."""

    points: list
    q2: list
    q1: list
    basis: list          # holomorphic quadratic basis, then (pole 1, pole 2) per point
    coef2: np.ndarray
    coef1: np.ndarray
    homogeneous_dim: int
    residual: float

    def element(self, coef) -> Differential:
        """Lazy sum over the basis, grouped by denominator."""
        coef = np.asarray(coef, dtype=DTYPE)
        nh = len(self.basis) - 2 * len(self.points)
        hol = _combine(self.basis[:nh], coef[:nh])
        expr = FieldExpr.wrap(hol.coeff)
        for n in range(len(self.points)):
            c1, c2 = coef[nh + 2 * n], coef[nh + 2 * n + 1]
            e1, e2 = self.basis[nh + 2 * n].coeff, self.basis[nh + 2 * n + 1].coeff
            # same denominator: add numerators directly
            a = P.polyadd(e1.a * c1, e2.a * c2)
            b = P.polyadd(e1.b * c1, e2.b * c2)
            expr = expr + FieldElem(e1.curve, a, b, e1.den, e1.scale)
        return Differential(expr, 2)

    def combination(self, w2, w1) -> Differential:
        coef = self.coef2 @ np.asarray(w2, dtype=DTYPE) + self.coef1 @ np.asarray(w1, dtype=DTYPE)
        return self.element(coef)


def building_blocks(curve: HyperellipticCurve, u, tol: Tolerances = DEFAULT_TOL,
                    require_unique: bool = True) -> BuildingBlocks:
    """Quadratic differentials with poles only on u and tails t^-2 (q2) or t^-1 (q1).

    At their own point the two other coefficients among t^-2, t^-1, t^0 vanish;
    at every other point of u they are regular and vanish.  The space of
    quadratic differentials with poles <= 2u is spanned by the holomorphic
    basis and the local pole pairs, so the conditions form a square system.
    """
    u = _as_divisor(u)
    pts = u.points()
    if any(m != 1 for _, m in u):
        raise PreconditionError("u must be reduced")
    if any(p.kind != "generic" for p in pts):
        raise PreconditionError("building blocks need u away from branch points and infinity")
    basis = list(quadratic_basis(curve))
    for p in pts:
        basis += [Differential(e, 2) for e in local_pole_pair(curve, p)]
    m = len(pts)
    exps = (-2, -1, 0)
    Mtx = np.zeros((3 * m, len(basis)), dtype=DTYPE)
    for n, p in enumerate(pts):
        ser = [b.expand_at(p, 4) for b in basis]
        for r, k in enumerate(exps):
            Mtx[3 * n + r] = [sr.coeff(k) for sr in ser]
    coef2 = np.zeros((len(basis), m), dtype=DTYPE)
    coef1 = np.zeros((len(basis), m), dtype=DTYPE)
    res_max = 0.0
    null = None
    for n in range(m):
        for k, out in ((-2, coef2), (-1, coef1)):
            rhs = np.zeros(3 * m, dtype=DTYPE)
            rhs[3 * n + exps.index(k)] = 1.0
            x, res, null, _ = solve_system(Mtx, rhs, tol)
            res_max = max(res_max, res)
            out[:, n] = x
    hom = null.shape[1] if null is not None else 0
    if res_max > tol.lin * max(1.0, float(np.abs(Mtx).max())):
        g = q_genericity(curve, u, tol)
        raise QSpecialError(f"building-block system inconsistent (residual {res_max:.2e})", g.dim, g.basis)
    if require_unique and hom and u.degree == 3 * curve.genus - 3:
        g = q_genericity(curve, u, tol)
        raise QSpecialError(f"u is Q-special: dim Q_u = {g.dim}", g.dim, g.basis)
    bb = BuildingBlocks(pts, [], [], basis, coef2, coef1, hom, res_max)
    bb.q2 = [bb.element(coef2[:, n]) for n in range(m)]
    bb.q1 = [bb.element(coef1[:, n]) for n in range(m)]
    return bb


def background_potential(curve: HyperellipticCurve, lam) -> FieldElem:
    """Regular x-chart potential (3 lam^2/16) [(f'/f)^2 - ((2g+2)/(2g+1)) f''/f].

    Its chart potentials are holomorphic at every branch point and at infinity.
    """
    g = curve.genus
    f = curve.f_xi
    f1 = P.polyder(f)
    f2 = P.polyder(f1)
    kap = (2 * g + 2) / (2 * g + 1)
    num = P.polysub(P.polymul(f1, f1), kap * P.polymul(f, f2)) * (3 * lam * lam / 16)
    den = tuple((complex(b), 2) for b in curve.branch_points)
    return FieldElem(curve, num, None, den, curve.radius ** 2 * curve.lead ** 2)


def _records(records):
    out = []
    for r in records:
        if isinstance(r, ApparentSingularity):
            out.append((r.position, complex(r.nu)))
        elif len(r) == 3:
            out.append((r[0], complex(r[2])))
        else:
            out.append((r[0], complex(r[1])))
    return out


def in_Q_u(curve, dq: Differential, pts, tol: Tolerances = DEFAULT_TOL) -> bool:
    """dq holomorphic quadratic and vanishing on ``pts`` (relative to its size)."""
    from .schwarzian import sample_points

    if dq.degree != 2:
        return False
    ref = max(abs(dq.evaluate(p)) for p in sample_points(curve, 6, seed=11))
    for p in list(pts) + curve.special_points():
        s = dq.expand_at(p, 3)
        if s.val < 0 and np.max(np.abs(s.window(s.val, 0))) > 1e-8 * max(ref, 1e-300):
            return False
    return all(abs(dq.evaluate(p)) <= 1e-8 * max(ref, 1e-300) for p in pts)


def oper_from_uv(curve: HyperellipticCurve, records, lam, deltaq: Differential | None = None,
                 tol: Tolerances = DEFAULT_TOL, verify: bool = True) -> OperRep:
    """Oper with apparent singularities at u_n and residue parameters nu_n (standard charts).

    With ``verify`` every u_n is classified again and the recovered nu_n is
    compared with the input; a mismatch raises :class:`NumericalError`.
    """
    if lam == 0:
        raise PreconditionError("opers need lambda != 0")
    recs = _records(records)
    pts = [p for p, _ in recs]
    nus = np.array([nu for _, nu in recs], dtype=DTYPE)
    if len(set(pts)) != len(pts):
        raise PreconditionError("u must be reduced (repeated point)")
    m = len(pts)
    n3 = 3 * curve.genus - 3
    if m > n3:
        raise PreconditionError(f"deg u = {m} exceeds 3g-3 = {n3}")
    u = DivisorSpec.of(pts)
    gen = q_genericity(curve, u, tol)
    if m == n3 and not gen.generic:
        raise QSpecialError(f"u is Q-special: dim Q_u = {gen.dim}; the linear system has no solution",
                            gen.dim, gen.basis)
    if deltaq is not None and not in_Q_u(curve, deltaq, pts, tol):
        raise PreconditionError("deltaq is not in Q_u")
    bb = building_blocks(curve, u, tol, require_unique=False)
    sing = bb.combination(-0.75 * np.ones(m), nus)
    B = background_potential(curve, lam)
    bop = OperRep(lam, B)
    # 0-th coefficients of the singular part and of B at each u_n
    rhs = np.empty(m, dtype=DTYPE)
    for n, p in enumerate(pts):
        s0 = sing.expand_at(p, 5).coeff(0)
        b0 = bop.chart_potential(p, 3).coeff(0) / (lam * lam)
        rhs[n] = -nus[n] ** 2 - b0 - s0
    basis = quadratic_basis(curve)
    E = evaluation_matrix(curve, u, basis)
    c, res, _, _ = solve_system(E, rhs, tol)
    if res > tol.lin * max(float(np.linalg.norm(E, 2)) * float(np.linalg.norm(c)), float(np.linalg.norm(rhs))):
        raise QSpecialError(f"holomorphic part unsolvable (residual {res:.2e})", gen.dim, gen.basis)
    q0 = _combine(basis, c)
    total = FieldExpr.wrap(sing.coeff) + FieldExpr.wrap(q0.coeff)
    if deltaq is not None:
        total = total + FieldExpr.wrap(deltaq.coeff)
    pot = FieldExpr.wrap(B) + total * complex(lam * lam)
    decl = sorted((ApparentSingularity.make(p, complex(lam * nu), lam) for p, nu in recs),
                  key=lambda s: s.position.sort_key())
    op = OperRep(complex(lam), pot, decl)
    op.meta["q_genericity"] = gen
    if verify:
        # a posteriori certificate: every u_n must classify back to its nu_n
        from .schwarzian import classify_point

        worst = 0.0
        for p, nu in recs:
            cl = classify_point(op, p, tol)
            if not cl.is_apparent:
                raise NumericalError(f"rebuilt oper is not apparent at {p} (defect {cl.defect:.2e})")
            worst = max(worst, abs(cl.nu - nu) / max(1.0, abs(nu)))
        if worst > tol.apparent:
            raise NumericalError(f"rebuilt residue parameters off by {worst:.2e}")
        op.meta["certificate"] = worst
    return op
