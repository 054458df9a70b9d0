"""Separation of variables: Darboux data -> apparent singularities (u_n, nu_n)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .conn2oper import apparent_data, omega_plus_zeros
from .differentials import DivisorSpec
from .errors import DegenerateInput, PreconditionError
from .field import Differential, FieldExpr
from .lambda_conn import (ConnectionForms, DarbouxPoint, ModuliChart, build_forms,
                          build_omega_plus, build_omega_zero, moment)
from .differentials import quadratic_basis
from .oper_from_data import _combine, q_genericity
from .schwarzian import ApparentSingularity, sample_points
from .zeros import divisor


@dataclass
class SovOutput:
    records: list
    lam: complex
    off_diagonal: bool
    q_generic: bool | None
    q_dim: int | None = None
    forms: ConnectionForms | None = None

    def __len__(self):
        return len(self.records)

    @property
    def positions(self):
        return [r.position for r in self.records]

    @property
    def nu_lambda(self) -> np.ndarray:
        return np.array([r.nu_lambda for r in self.records])

    @property
    def u_x(self) -> np.ndarray:
        return np.array([r.position.x0 for r in self.records])

    def valid(self) -> bool:
        return bool(self.off_diagonal and (self.q_generic is not False))


def _record_distance(a: ApparentSingularity, b: ApparentSingularity) -> float:
    if a.position.kind != b.position.kind:
        return np.inf
    if a.position.kind == "generic":
        if a.position.sheet != b.position.sheet and abs(a.position.y0 + b.position.y0) < abs(a.position.y0 - b.position.y0):
            return np.inf
        dx = abs(a.position.x0 - b.position.x0)
    elif a.position.kind == "branch":
        dx = 0.0 if a.position.index == b.position.index else np.inf
    else:
        dx = 0.0
    return max(dx, abs(a.nu_lambda - b.nu_lambda))


def multiset_match(a, b) -> tuple[list, float]:
    """Greedy optimal-ish matching of two record lists; returns (pairs, max distance)."""
    ra = list(a.records if isinstance(a, SovOutput) else a)
    rb = list(b.records if isinstance(b, SovOutput) else b)
    if len(ra) != len(rb):
        return [], np.inf
    D = np.array([[_record_distance(x, y) for y in rb] for x in ra]).reshape(len(ra), len(rb))
    pairs = []
    used_a, used_b = set(), set()
    order = np.argsort(D, axis=None)
    for flat in order:
        i, j = divmod(int(flat), len(rb))
        if i in used_a or j in used_b:
            continue
        pairs.append((i, j))
        used_a.add(i)
        used_b.add(j)
    worst = max((D[i, j] for i, j in pairs), default=0.0)
    return sorted(pairs), float(worst)


def multiset_equal(a, b, tol: float) -> bool:
    return multiset_match(a, b)[1] <= tol


def _off_diagonal(records, tol: Tolerances) -> bool:
    pts = [r.position for r in records]
    for i in range(len(pts)):
        for j in range(i):
            p, q = pts[i], pts[j]
            if p.kind != q.kind:
                continue
            if p.kind == "generic":
                same_sheet = abs(p.y0 - q.y0) <= abs(p.y0 + q.y0)
                if same_sheet and abs(p.x0 - q.x0) <= tol.cluster * max(1.0, abs(p.x0)):
                    return False
            elif p == q:
                return False
    return True


def _finish(mc, forms, zero_list, lam, tol, check_generic, records=None) -> SovOutput:
    recs = records if records is not None else apparent_data(mc, forms, tol=tol, zero_list=zero_list)
    if len(recs) != mc.m:
        raise DegenerateInput(f"expected {mc.m} apparent singularities, found {len(recs)}")
    offd = _off_diagonal(recs, tol)
    qg, qd = None, None
    if check_generic and offd:
        gen = q_genericity(mc.curve, DivisorSpec.of([r.position for r in recs]), tol)
        qg, qd = gen.generic, gen.dim
    return SovOutput(recs, complex(lam), offd, qg, qd, forms)


def _forms_plus_zero(mc: ModuliChart, pt: DarbouxPoint) -> ConnectionForms:
    wp = build_omega_plus(mc, pt.k, pt.z)
    w0 = build_omega_zero(mc, pt, wp)
    return ConnectionForms(w0, wp, None, mc.lam, [], np.asarray(pt.z).copy())


def sov_lambda(mc: ModuliChart, pt: DarbouxPoint, tol: Tolerances | None = None,
               check_generic: bool = True) -> SovOutput:
    """SoV_lambda: positions and residue parameters of the induced oper's apparent singularities."""
    tol = mc.tol if tol is None else tol
    if mc.lam == 0:
        raise PreconditionError("sov_lambda needs lambda != 0; use sov_higgs at lambda = 0")
    forms = _forms_plus_zero(mc, pt)
    zl = omega_plus_zeros(mc, forms, tol=tol)
    bad = [(p, m) for p, m in zl if m != 1]
    if bad:
        raise DegenerateInput(f"non-simple zeros of w+: {bad}")
    return _finish(mc, forms, zl, mc.lam, tol, check_generic)


def sov_higgs(mc: ModuliChart, pt: DarbouxPoint, tol: Tolerances | None = None,
              check_generic: bool = True) -> SovOutput:
    """lambda = 0: Baker-Akhiezer data (u_n, v_n = w0/dx at u_n); nu_lambda carries v_n."""
    tol = mc.tol if tol is None else tol
    if mc.lam != 0:
        raise PreconditionError("sov_higgs needs a chart with lambda = 0")
    H = moment(pt)
    if abs(H) > tol.moment_tol(0.0):
        raise PreconditionError(f"H = {H:.3e} != 0: the Higgs field does not exist off H^-1(0)")
    forms = _forms_plus_zero(mc, pt)
    zl = omega_plus_zeros(mc, forms, tol=tol)
    bad = [(p, m) for p, m in zl if m != 1]
    if bad:
        raise DegenerateInput(f"non-simple zeros of w+: {bad}")
    return _finish(mc, forms, zl, 0.0, tol, check_generic)


def sov(mc: ModuliChart, pt: DarbouxPoint, **kw) -> SovOutput:
    return sov_higgs(mc, pt, **kw) if mc.lam == 0 else sov_lambda(mc, pt, **kw)


def _form_scale(forms) -> float:
    pts = sample_points(forms.omega0.curve, 4, seed=5)
    return max(abs(w.evaluate(p)) ** 2 for p in pts for w in (forms.omega0, forms.omega_plus)) + 1e-300


@dataclass
class SpectralReport:
    smooth: bool
    det: Differential | None
    zeros: list = field(default_factory=list)
    witness: str = ""


def det_phi(forms: ConnectionForms, samples: int = 18, seed: int = 3) -> tuple[Differential, float]:
    """det of the Higgs field, -(w0^2 + w+ w-), as a holomorphic quadratic differential.

    The product is sampled lazily and projected onto the quadratic basis; the
    relative least-squares residual measures any failure to be holomorphic.
    Forming the product as one function-field element would multiply out
    denominators whose cancellation is only numerical.
    """
    if forms.omega_minus is None:
        raise PreconditionError("det(phi) needs w-")
    w0, wp, wm = (FieldExpr.wrap(w.coeff) for w in (forms.omega0, forms.omega_plus, forms.omega_minus))
    expr = -(w0 * w0 + wp * wm)
    curve = forms.omega0.curve
    pts = sample_points(curve, samples, seed=seed)
    basis = quadratic_basis(curve)
    E = np.array([[b.evaluate(p) for b in basis] for p in pts])
    v = np.array([expr.evaluate(p) for p in pts])
    c, *_ = np.linalg.lstsq(E, v, rcond=None)
    res = float(np.linalg.norm(E @ c - v) / max(np.linalg.norm(v), 1e-300))
    return _combine(basis, c), res


def spectral_check(mc: ModuliChart, forms: ConnectionForms, tol: Tolerances | None = None) -> SpectralReport:
    """Smooth spectral curve iff det(phi) has 4g - 4 simple zeros."""
    tol = mc.tol if tol is None else tol
    if forms.lam != 0:
        raise PreconditionError("spectral_check is a lambda = 0 notion")
    if forms.omega_minus is None:
        raise PreconditionError("spectral_check needs w-")
    w0, wp, wm = forms.omega0, forms.omega_plus, forms.omega_minus
    if (w0.is_zero() and wm.is_zero()) or (w0.is_zero() and wp.is_zero()):
        return SpectralReport(False, None, [], "det(phi) vanishes identically")
    det, res = det_phi(forms)
    if res > 1e-8:
        return SpectralReport(False, det, [], f"det(phi) is not holomorphic (residual {res:.2e})")
    scale = max(abs(det.evaluate(p)) for p in sample_points(mc.curve, 4, seed=5))
    if scale <= 1e-12 * _form_scale(forms):
        return SpectralReport(False, det, [], "det(phi) vanishes identically")
    zs, ps = divisor(det, tol)
    if ps:
        return SpectralReport(False, det, zs, f"det(phi) has poles {ps}")
    deg = sum(m for _, m in zs)
    if deg != 4 * mc.g - 4:
        return SpectralReport(False, det, zs, f"zero degree {deg} != 4g-4")
    mult = [(p, m) for p, m in zs if m > 1]
    if mult:
        return SpectralReport(False, det, zs, f"multiple zeros {mult}")
    return SpectralReport(True, det, zs, "")
