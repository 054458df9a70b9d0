"""Reference divisors, Darboux coordinates and the connection forms (w0, w+, w-).

Conventions
-----------
* ``z_i`` is the displacement of ``q_i`` from its reference position in the
  chart ``x - x(q_i_ref)``; live points are obtained by sheet continuation.
* ``zcheck_i = -2 * [0-th coefficient of w0 at q_i]`` in the chart ``x - x(q_i)``.
* ``dA[j, i] = w_i(q_j)`` for the holomorphic basis ``w_i = x^i dx / y``;
  ``kappa`` solves ``dA @ kappa = zcheck``.
* Frame changes act by ``A -> G A G^-1 - lam dG G^-1``; at ``p_r`` the
  regular frame is ``[[1, x_r / w], [0, 1]]`` with ``w = x - x(p_r)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .curve import CurvePoint, HyperellipticCurve
from .differentials import (Condition, DivisorSpec, constant_condition, constrained_differential,
                            holomorphic_basis, residue_condition)
from .errors import DegenerateSystem, InvalidChart, MomentObstruction, PreconditionError
from .field import Differential
from .scalar import asarray


@dataclass(frozen=True)
class ModuliChart:
    """Curve, degree ``d`` and reference divisors ``q`` (live), ``qcheck``, ``p`` (fixed)."""

    curve: HyperellipticCurve
    d: int
    lam: complex
    q: tuple
    qcheck: tuple
    p: tuple
    tol: Tolerances = DEFAULT_TOL

    @property
    def g(self) -> int:
        return self.curve.genus

    @property
    def N(self) -> int:
        return self.g - 1 - 2 * self.d

    @property
    def m(self) -> int:
        return 2 * self.g - 2 - 2 * self.d

    @property
    def lam_d(self) -> complex:
        return self.lam * self.d

    def with_lambda(self, lam) -> "ModuliChart":
        return replace(self, lam=complex(lam))

    def q_points(self, z=None) -> list[CurvePoint]:
        if z is None:
            return list(self.q)
        z = asarray(z)
        return [self.curve.move(qi, qi.x0 + zi) if zi != 0 else qi for qi, zi in zip(self.q, z)]


@dataclass(frozen=True)
class DarbouxPoint:
    x: np.ndarray
    z: np.ndarray
    k: np.ndarray
    zcheck: np.ndarray

    @classmethod
    def make(cls, x, z, k, zcheck) -> "DarbouxPoint":
        return cls(asarray(x).copy(), asarray(z).copy(), asarray(k).copy(), asarray(zcheck).copy())

    def replace(self, **kw) -> "DarbouxPoint":
        d = dict(x=self.x, z=self.z, k=self.k, zcheck=self.zcheck)
        d.update({k: asarray(v) for k, v in kw.items()})
        return DarbouxPoint.make(**d)

    def flat(self) -> np.ndarray:
        """Coordinates in the order (z, x | zcheck, k)."""
        return np.concatenate([self.z, self.x, self.zcheck, self.k])

    @classmethod
    def from_flat(cls, v, g: int, N: int) -> "DarbouxPoint":
        v = asarray(v)
        z, x = v[:g], v[g:g + N]
        zc, k = v[g + N:2 * g + N], v[2 * g + N:]
        return cls.make(x, z, k, zc)


@dataclass
class ConnectionForms:
    omega0: Differential
    omega_plus: Differential
    omega_minus: Differential | None
    lam: complex
    minus_homogeneous: list = field(default_factory=list)
    z: np.ndarray | None = None


def moment(pt: DarbouxPoint) -> complex:
    """H = sum x_r k_r."""
    return complex(np.dot(pt.x, pt.k))


def cstar_act(eps: complex, pt: DarbouxPoint) -> DarbouxPoint:
    """(x, k) -> (eps x, k / eps); z and zcheck fixed."""
    if eps == 0:
        raise PreconditionError("eps must be nonzero")
    return pt.replace(x=pt.x * eps, k=pt.k / eps)


def project_to_level(mc: ModuliChart, pt: DarbouxPoint, target=None) -> DarbouxPoint:
    """Rescale k so that H = target (default lam d).  At target 0 subtract the x-component."""
    target = mc.lam_d if target is None else target
    H = moment(pt)
    if target != 0:
        if H == 0:
            raise PreconditionError("cannot rescale k onto the level set from H = 0")
        return pt.replace(k=pt.k * (target / H))
    xx = np.vdot(pt.x, pt.x).real
    return pt.replace(k=pt.k - (H / xx) * np.conj(pt.x))


def dA_matrix(mc: ModuliChart, z=None) -> np.ndarray:
    qs = mc.q_points(z)
    basis = holomorphic_basis(mc.curve)
    return np.array([[w.evaluate(qj) for w in basis] for qj in qs])


def _check_distinct(mc, pts, failures):
    xs = [(p.x0, p.y0) for p in pts]
    for i in range(len(pts)):
        if pts[i].kind != "generic":
            failures.append(f"marked point {i} is not generic")
        for j in range(i):
            if xs[i] == xs[j]:
                failures.append(f"marked points {j} and {i} coincide (multiplicity > 1)")


def omega_plus_space(mc: ModuliChart, z=None) -> list[Differential]:
    """Basis of differentials vanishing to order 2 on q with double poles allowed on qcheck."""
    qs = mc.q_points(z)
    poles = DivisorSpec(tuple((p, 2) for p in mc.qcheck) + tuple((qi, -2) for qi in qs))
    sol = constrained_differential(mc.curve, poles, [], 1, mc.tol)
    if len(sol.homogeneous) != mc.N:
        raise DegenerateSystem(f"dim = {len(sol.homogeneous)} != N = {mc.N} (special line bundle)",
                               nullity=len(sol.homogeneous))
    return sol.homogeneous


def validate_chart(mc: ModuliChart, z=None) -> dict:
    """Check distinctness, spanning at p and non-exceptionality of q; return condition numbers."""
    failures: list = []
    qs = mc.q_points(z)
    allpts = list(qs) + list(mc.qcheck) + list(mc.p)
    if len(qs) != mc.g:
        failures.append(f"|q| = {len(qs)} != g")
    if len(mc.qcheck) != mc.g - mc.d:
        failures.append(f"|qcheck| = {len(mc.qcheck)} != g - d")
    if len(mc.p) != mc.N:
        failures.append(f"|p| = {len(mc.p)} != N")
    if not (mc.d < 0 and -2 * mc.d <= mc.g - 1):
        failures.append("need d < 0 with -2d <= g - 1")
    _check_distinct(mc, allpts, failures)
    diag = {"failures": failures}
    if failures:
        raise InvalidChart("; ".join(failures), failures)
    try:
        basis = omega_plus_space(mc, z)
        E = np.array([[b.evaluate(pr) for b in basis] for pr in mc.p])
        diag["spanning_cond"] = float(np.linalg.cond(E))
    except DegenerateSystem as e:
        failures.append(f"omega_plus space: {e}")
        diag["spanning_cond"] = float("inf")
    if diag.get("spanning_cond", np.inf) > 1e10:
        failures.append("spanning condition fails: evaluation matrix at p is singular")
    dA = dA_matrix(mc, z)
    diag["dA_cond"] = float(np.linalg.cond(dA))
    if diag["dA_cond"] > 1e10:
        failures.append("non-exceptionality fails: dA is singular")
    if failures:
        raise InvalidChart("; ".join(failures), failures)
    return diag


def build_omega_plus(mc: ModuliChart, k, z=None) -> Differential:
    """The unique w+ with w+(p_r) = k_r."""
    k = asarray(k)
    qs = mc.q_points(z)
    poles = DivisorSpec(tuple((p, 2) for p in mc.qcheck) + tuple((qi, -2) for qi in qs))
    conds = [constant_condition(pr, kr) for pr, kr in zip(mc.p, k)]
    sol = constrained_differential(mc.curve, poles, conds, 1, mc.tol)
    if sol.homogeneous:
        raise DegenerateSystem("interpolation at p is singular", nullity=len(sol.homogeneous))
    return sol.diff


def residue_sum(mc: ModuliChart, pt: DarbouxPoint) -> complex:
    """Sum of the residues prescribed for w0: lam g - lam (g - d) - H."""
    return mc.lam * mc.g - mc.lam * (mc.g - mc.d) - moment(pt)


def build_omega_zero(mc: ModuliChart, pt: DarbouxPoint, omega_plus: Differential) -> Differential:
    """w0 with residues lam on q, -lam on qcheck, -x_r w+(p_r) on p and 0-th
    coefficients -zcheck_i / 2 on q."""
    H = moment(pt)
    gap = H - mc.lam_d
    if abs(gap) > mc.tol.moment_tol(mc.lam_d):
        raise MomentObstruction(
            f"residue-theorem obstruction: H - lam d = {gap:.3e}, residues sum to {residue_sum(mc, pt):.3e}",
            residue_sum=residue_sum(mc, pt))
    qs = mc.q_points(pt.z)
    lam = mc.lam
    kp = [omega_plus.evaluate(pr) for pr in mc.p]
    conds: list[Condition] = []
    conds += [residue_condition(qi, lam) for qi in qs]
    conds += [residue_condition(qc, -lam) for qc in mc.qcheck]
    conds += [residue_condition(pr, -xr * kr) for pr, xr, kr in zip(mc.p, pt.x, kp)]
    conds += [constant_condition(qi, -zc / 2) for qi, zc in zip(qs, pt.zcheck)]
    poles = DivisorSpec.of(list(qs) + list(mc.qcheck) + list(mc.p))
    sol = constrained_differential(mc.curve, poles, conds, 1, mc.tol)
    if sol.homogeneous:
        raise DegenerateSystem("w0 system is degenerate", nullity=len(sol.homogeneous))
    return sol.diff


def minus_singular_parts(mc: ModuliChart, pt: DarbouxPoint, omega0, omega_plus, order: int = 4):
    """Coefficients (w^-2, w^-1) of w- at each p_r forced by regularity of the frame change."""
    out = []
    for pr, xr in zip(mc.p, pt.x):
        a = omega0.expand_at(pr, order)
        c = omega_plus.expand_at(pr, order)
        m2 = 2 * xr * a.coeff(-1) + xr * xr * c.coeff(0) - mc.lam * xr
        m1 = 2 * xr * a.coeff(0) + xr * xr * c.coeff(1)
        out.append((complex(m2), complex(m1)))
    return out


def build_omega_minus(mc: ModuliChart, pt: DarbouxPoint, omega0, omega_plus):
    """Particular w- and the homogeneous basis (poles <= 2 on p + q, double zeros on qcheck)."""
    qs = mc.q_points(pt.z)
    sing = minus_singular_parts(mc, pt, omega0, omega_plus)
    conds = []
    for pr, (m2, m1) in zip(mc.p, sing):
        conds += [Condition(pr, -2, m2), Condition(pr, -1, m1)]
    poles = DivisorSpec(tuple((p, 2) for p in mc.p) + tuple((qi, 2) for qi in qs)
                        + tuple((qc, -2) for qc in mc.qcheck))
    sol = constrained_differential(mc.curve, poles, conds, 1, mc.tol)
    return sol.diff, sol.homogeneous


def build_forms(mc: ModuliChart, pt: DarbouxPoint, with_minus: bool = True) -> ConnectionForms:
    wp = build_omega_plus(mc, pt.k, pt.z)
    w0 = build_omega_zero(mc, pt, wp)
    wm, hom = (build_omega_minus(mc, pt, w0, wp) if with_minus else (None, []))
    return ConnectionForms(w0, wp, wm, mc.lam, hom, asarray(pt.z).copy())


def third_kind_normalized(mc: ModuliChart, p_plus: CurvePoint, p_minus: CurvePoint, z=None) -> Differential:
    """Residues +1/-1 at p_plus/p_minus, vanishing 0-th coefficients at each q_i."""
    if p_plus == p_minus:
        raise PreconditionError("p_plus = p_minus")
    qs = mc.q_points(z)
    conds = [residue_condition(p_plus, 1.0), residue_condition(p_minus, -1.0)]
    conds += [constant_condition(qi, 0.0) for qi in qs if qi not in (p_plus, p_minus)]
    sol = constrained_differential(mc.curve, DivisorSpec.of([p_plus, p_minus]), conds, 1, mc.tol)
    if sol.homogeneous:
        raise DegenerateSystem("normalization system degenerate (q exceptional)",
                               nullity=len(sol.homogeneous))
    return sol.diff


def darboux_from_forms(mc: ModuliChart, forms: ConnectionForms, z=None):
    """(k, zcheck, kappa) read off the forms."""
    z = forms.z if z is None else z
    qs = mc.q_points(z)
    k = np.array([forms.omega_plus.evaluate(pr) for pr in mc.p])
    zc = np.array([-2 * forms.omega0.expand_at(qi, 3).coeff(0) for qi in qs])
    kappa = np.linalg.solve(dA_matrix(mc, z), zc)
    return k, zc, kappa


def random_point(mc: ModuliChart, rng, scale: float = 1.0, z_scale: float = 0.0) -> DarbouxPoint:
    """Seeded random Darboux point projected onto H = lam d."""
    def cn(n):
        return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    x, k, zc = cn(mc.N), cn(mc.N), cn(mc.g)
    z = z_scale * (rng.standard_normal(mc.g) + 1j * rng.standard_normal(mc.g))
    return project_to_level(mc, DarbouxPoint.make(x, z, k, zc))
