"""Finite-difference Poisson brackets in the Darboux coordinates (z, x | zcheck, k).

    {F, G} = sum_i (dF/dz_i dG/dzcheck_i - dF/dzcheck_i dG/dz_i)
           + sum_r (dF/dx_r dG/dk_r  - dF/dk_r dG/dx_r)

Observables of the SoV map are only defined on the level set H = lam d, so
they are evaluated through a C*-invariant extension: k -> k lam d / H (or
x -> x lam d / H).  At lambda = 0 the point is projected back onto H = 0
along conj(x), which is also C*-equivariant.  Every complex coordinate is
differenced along its real and imaginary axis; for holomorphic observables
the two partials agree, and their mismatch is reported.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import (DegenerateInput, PreconditionError, RootFindingError, SovlabError,
                     StencilFailure)
from .lambda_conn import (DarbouxPoint, ModuliChart, moment, omega_plus_space, project_to_level)
from .jsonio import cjson
from .scalar import DTYPE
from .sov import SovOutput, sov

EXTENSIONS = ("k", "x", "none")


def extend(mc: ModuliChart, pt: DarbouxPoint, how: str = "k") -> DarbouxPoint:
    """Move ``pt`` onto H = lam d along a C*-invariant direction."""
    if how == "none":
        return pt
    target = mc.lam_d
    if target == 0:
        return project_to_level(mc, pt, 0.0)
    H = moment(pt)
    if H == 0:
        raise PreconditionError("H = 0: the invariant extension is undefined here")
    if how == "k":
        return pt.replace(k=pt.k * (target / H))
    if how == "x":
        return pt.replace(x=pt.x * (target / H))
    raise PreconditionError(f"unknown extension {how!r}")


@dataclass
class Observable:
    """Scalar or vector function of (mc, pt), evaluated after ``extension``."""

    name: str
    fn: Callable
    extension: str = "k"
    size: int = 1
    tracked: bool = False

    def __call__(self, mc, pt):
        v = self.fn(mc, extend(mc, pt, self.extension))
        return np.atleast_1d(np.asarray(v, dtype=DTYPE))


def coordinate(name: str, index: int) -> Observable:
    """One Darboux coordinate (no extension): name in {z, x, zcheck, k}."""
    return Observable(f"{name}[{index}]", lambda mc, pt: getattr(pt, name)[index], "none")


def moment_observable() -> Observable:
    return Observable("H", lambda mc, pt: moment(pt), "none")


def constant_observable(c=1.0) -> Observable:
    return Observable("const", lambda mc, pt: c, "none")


def scale_observable(mc: ModuliChart, pt0: DarbouxPoint) -> Observable:
    """u0: first coefficient of w+ in the fixed basis of its space (linear in k)."""
    basis = omega_plus_space(mc, pt0.z)
    Mx = np.array([[b.evaluate(pr) for b in basis] for pr in mc.p])
    Minv = np.linalg.inv(Mx)
    return Observable("u0", lambda mc_, pt: (Minv @ pt.k)[0], "none")


# SoV observables with zero tracking -------------------------------------------

def _match(base: SovOutput, out: SovOutput, direction) -> list[int]:
    """Index into ``out`` for every base record (nearest neighbour, collision-checked)."""
    bx = base.u_x
    ox = out.u_x
    if len(ox) != len(bx):
        raise StencilFailure(f"record count changed along {direction}", direction)
    sep = np.abs(bx[:, None] - bx[None, :]) + np.diag(np.full(len(bx), np.inf))
    gap = np.min(sep, axis=1) if len(bx) > 1 else np.array([np.inf])
    idx = []
    for i, r in enumerate(base.records):
        d = np.abs(ox - r.position.x0)
        for j, o in enumerate(out.records):
            if r.position.kind == "generic" and o.position.kind == "generic":
                if abs(o.position.y0 - r.position.y0) > abs(o.position.y0 + r.position.y0):
                    d[j] = np.inf
        j = int(np.argmin(d))
        if not np.isfinite(d[j]) or d[j] > 0.25 * gap[i]:
            raise StencilFailure(f"zero {i} lost along {direction} (moved {d[j]:.2e})", direction)
        idx.append(j)
    if len(set(idx)) != len(idx):
        raise StencilFailure(f"zero collision along {direction}", direction)
    return idx


class _TrackedSov:
    """Picklable evaluator behind :func:`sov_family`."""

    def __init__(self, base: SovOutput):
        self.base = base

    def __call__(self, mc_, pt, direction=None):
        try:
            out = sov(mc_, pt, check_generic=False)
        except (DegenerateInput, RootFindingError) as e:
            raise StencilFailure(f"evaluation failed along {direction}: {e}", direction) from e
        idx = _match(self.base, out, direction)
        u = np.array([out.records[j].position.x0 for j in idx])
        nu = np.array([out.records[j].nu_lambda for j in idx])
        return np.concatenate([u, nu])


def sov_family(mc: ModuliChart, base: SovOutput, extension: str = "k") -> Observable:
    """Vector observable (x(u_1), ..., x(u_m), nu_l1, ..., nu_lm), tracked against ``base``."""
    return Observable("sov", _TrackedSov(base), extension, 2 * len(base), tracked=True)


def _eval(ob: Observable, mc, pt, direction):
    if ob.tracked:
        return np.atleast_1d(ob.fn(mc, extend(mc, pt, ob.extension), direction))
    try:
        return ob(mc, pt)
    except StencilFailure:
        raise
    except SovlabError as e:
        raise StencilFailure(f"evaluation failed along {direction}: {e}", direction) from e


# finite differences -------------------------------------------------------------

def _workers() -> int:
    try:
        return max(1, int(os.environ.get("SOVLAB_THREADS", "1")))
    except ValueError:
        return 1


def _task(args):
    ob, mc, v, g, N, direction = args
    return _eval(ob, mc, DarbouxPoint.from_flat(v, g, N), direction)


def _labels(g, N):
    return ([f"z[{i}]" for i in range(g)] + [f"x[{r}]" for r in range(N)]
            + [f"zcheck[{i}]" for i in range(g)] + [f"k[{r}]" for r in range(N)])


@dataclass
class Gradient:
    d_re: np.ndarray      # (n_obs, dim) from real-axis differences
    d_im: np.ndarray      # (n_obs, dim) from imaginary-axis differences
    steps: np.ndarray

    @property
    def value(self) -> np.ndarray:
        return 0.5 * (self.d_re + self.d_im)

    @property
    def cauchy_riemann(self) -> float:
        sc = max(float(np.max(np.abs(self.value))), 1e-300)
        return float(np.max(np.abs(self.d_re - self.d_im))) / sc


def gradient(ob: Observable, mc: ModuliChart, pt: DarbouxPoint, h: float = 1e-5,
             workers: int | None = None) -> Gradient:
    """Complex partials of ``ob`` in each of the 2(g + N) Darboux coordinates."""
    g, N = len(pt.z), len(pt.x)
    v0 = pt.flat()
    dim = v0.size
    steps = h * (np.abs(v0) + 1.0)
    labels = _labels(g, N)
    jobs = []
    for j in range(dim):
        for axis in (1.0, 1j):
            for sgn in (1.0, -1.0):
                v = v0.copy()
                v[j] += sgn * axis * steps[j]
                jobs.append((ob, mc, v, g, N, f"{labels[j]} {'re' if axis == 1.0 else 'im'}{'+' if sgn > 0 else '-'}"))
    w = _workers() if workers is None else workers
    if w > 1:
        with ProcessPoolExecutor(max_workers=w) as ex:
            vals = list(ex.map(_task, jobs))
    else:
        vals = [_task(a) for a in jobs]
    vals = np.array(vals)
    n = vals.shape[1]
    d_re = np.empty((n, dim), dtype=DTYPE)
    d_im = np.empty((n, dim), dtype=DTYPE)
    for j in range(dim):
        fp, fm, ip, im = vals[4 * j: 4 * j + 4]
        d_re[:, j] = (fp - fm) / (2 * steps[j])
        d_im[:, j] = (ip - im) / (2j * steps[j])
    return Gradient(d_re, d_im, steps)


def omega_matrix(g: int, N: int) -> np.ndarray:
    """Poisson tensor in the coordinate order (z, x | zcheck, k)."""
    n = g + N
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


def bracket_from_gradients(JF: np.ndarray, JG: np.ndarray, g: int, N: int) -> np.ndarray:
    return JF @ omega_matrix(g, N) @ JG.T


def bracket(F: Observable, G: Observable, mc: ModuliChart, pt: DarbouxPoint, h: float = 1e-5,
            richardson: bool = False) -> complex:
    """{F, G} at ``pt`` by central differences (optionally Richardson-extrapolated)."""
    if h <= 0:
        raise PreconditionError("h must be positive")
    g, N = len(pt.z), len(pt.x)

    def once(hh):
        JF = gradient(F, mc, pt, hh).value
        JG = gradient(G, mc, pt, hh).value
        return bracket_from_gradients(JF, JG, g, N)

    B = once(h)
    if richardson:
        B = (4 * once(h / 2) - B) / 3
    return complex(B[0, 0]) if B.size == 1 else B


# theorem verification -----------------------------------------------------------

@dataclass
class BracketReport:
    brackets: np.ndarray
    target: np.ndarray
    max_dev: float
    dev_uv: float
    dev_uu: float
    dev_vv: float
    tol: float
    h: float
    steps: np.ndarray
    cauchy_riemann: float
    lam: complex
    m: int
    richardson: np.ndarray | None = None
    extension: str = "k"
    diagnostics: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.max_dev) and self.max_dev <= self.tol)

    def to_dict(self) -> dict:
        d = {"passed": self.passed, "max_dev": self.max_dev, "dev_uv": self.dev_uv,
             "dev_uu": self.dev_uu, "dev_vv": self.dev_vv, "tol": self.tol, "h": self.h,
             "cauchy_riemann": self.cauchy_riemann, "lambda": cjson(self.lam), "m": self.m,
             "extension": self.extension, "brackets": cjson(self.brackets)}
        if self.richardson is not None:
            d["brackets_richardson"] = cjson(self.richardson)
        d.update(self.diagnostics)
        return d


def theorem_target(m: int) -> np.ndarray:
    """{u, u} = 0, {u_n, nu_m} = delta_nm, {nu, nu} = 0."""
    T = np.zeros((2 * m, 2 * m))
    T[:m, m:] = np.eye(m)
    T[m:, :m] = -np.eye(m)
    return T


def _deviations(B, m):
    T = theorem_target(m)
    D = np.abs(B - T)
    return (float(D.max()), float(D[:m, m:].max()), float(D[:m, :m].max()), float(D[m:, m:].max()))


def verify_theorem(mc: ModuliChart, pt: DarbouxPoint, tol: float | None = None, h: float | None = None,
                   extension: str = "k", richardson: bool = False, tols: Tolerances | None = None,
                   base: SovOutput | None = None) -> BracketReport:
    """Estimate all brackets among {u_n} and {nu_l,n} and compare with the canonical pattern."""
    tols = mc.tol if tols is None else tols
    tol = tols.poisson if tol is None else tol
    h = tols.h_step if h is None else h
    if mc.lam != 0 and abs(moment(pt) - mc.lam_d) > tols.moment_tol(mc.lam_d):
        raise PreconditionError("point is not on the level set H = lam d")
    base = sov(mc, pt) if base is None else base
    if not base.off_diagonal:
        raise DegenerateInput("SoV output is on the diagonal")
    if base.q_generic is False:
        raise DegenerateInput(f"SoV output is Q-special (dim Q_u = {base.q_dim})")
    fam = sov_family(mc, base, extension)
    g, N = mc.g, mc.N
    G1 = gradient(fam, mc, pt, h)
    B = bracket_from_gradients(G1.value, G1.value, g, N)
    R = None
    if richardson:
        G2 = gradient(fam, mc, pt, h / 2)
        B2 = bracket_from_gradients(G2.value, G2.value, g, N)
        R = (4 * B2 - B) / 3
    m = len(base)
    mx, duv, duu, dvv = _deviations(B, m)
    return BracketReport(B, theorem_target(m), mx, duv, duu, dvv, tol, h, G1.steps,
                         G1.cauchy_riemann, mc.lam, m, R, extension)


def richardson_profile(mc: ModuliChart, pt: DarbouxPoint, h: float, extension: str = "k",
                       axis: str = "re") -> dict:
    """Deviation from the target at h, h/2, h/4 and the ratio of successive differences.

    ``axis="re"`` uses plain second-order central differences (ratio near 4);
    ``axis="both"`` averages the real- and imaginary-axis differences, which
    cancels the h^2 term for holomorphic observables (ratio near 16).
    """
    base = sov(mc, pt)
    fam = sov_family(mc, base, extension)
    Bs = []
    for hh in (h, h / 2, h / 4):
        G = gradient(fam, mc, pt, hh)
        J = G.d_re if axis == "re" else G.value
        Bs.append(bracket_from_gradients(J, J, mc.g, mc.N))
    m = len(base)
    devs = [_deviations(B, m)[0] for B in Bs]
    d1 = float(np.max(np.abs(Bs[0] - Bs[1])))
    d2 = float(np.max(np.abs(Bs[1] - Bs[2])))
    return {"h": [h, h / 2, h / 4], "deviation": devs, "ratio": d1 / max(d2, 1e-300), "axis": axis}


@dataclass
class MomentFlowReport:
    h_sov: float
    u0: complex
    h_u0: complex
    ratio: complex
    h_const: float
    tol: float

    @property
    def passed(self) -> bool:
        return (self.h_sov <= self.tol and abs(abs(self.ratio) - 1) <= self.tol and self.h_const <= self.tol)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "max_H_sov": self.h_sov, "u0": cjson(self.u0),
                "H_u0": cjson(self.h_u0), "ratio": cjson(self.ratio), "H_const": self.h_const,
                "tol": self.tol}


def verify_moment_flow(mc: ModuliChart, pt: DarbouxPoint, h: float | None = None,
                       tol: float | None = None) -> MomentFlowReport:
    """{H, SoV observables} = 0 and {H, u0} = u0 (the sign is reported in ``ratio``)."""
    if mc.lam == 0:
        raise PreconditionError("verify_moment_flow needs lambda != 0")
    h = mc.tol.h_step if h is None else h
    tol = mc.tol.poisson if tol is None else tol
    g, N = mc.g, mc.N
    JH = gradient(moment_observable(), mc, pt, h).value
    base = sov(mc, pt, check_generic=False)
    JS = gradient(sov_family(mc, base), mc, pt, h).value
    hs = bracket_from_gradients(JH, JS, g, N)
    u0 = scale_observable(mc, pt)
    Ju = gradient(u0, mc, pt, h).value
    hu = complex(bracket_from_gradients(JH, Ju, g, N)[0, 0])
    u0v = complex(u0(mc, pt)[0])
    Jc = gradient(constant_observable(), mc, pt, h).value
    hc = float(np.abs(bracket_from_gradients(JH, Jc, g, N)).max())
    return MomentFlowReport(float(np.abs(hs).max()), u0v, hu, hu / u0v, hc, tol)
