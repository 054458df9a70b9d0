"""Odd hyperelliptic curves y^2 = f(x), their points and standard charts.

Standard charts
---------------
* generic point ``(x0, y0)``: ``t = x - x0`` on the sheet through ``y0``;
* finite branch point ``b``: ``t = y`` and ``x = b + S(t^2)``;
* infinity: ``x = t^-2``, ``y = t^-(2g+1) * sqrt(lead) * prod(1 - b_i t^2)^(1/2)``.

Internally polynomials are stored in the "mapped" variable
``xi = (x - center) / radius``, which keeps the branch points in the unit
disk and the coefficient arrays well scaled.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import polynomial as P

from .config import DEFAULT_TOL
from .errors import PreconditionError, RootFindingError
from .scalar import DTYPE, asarray
from .series import LocalSeries, log1p_factor_series


def sqrt_conv(w: complex) -> complex:
    """Square root with nonnegative real part; ties broken by nonnegative imaginary part."""
    r = complex(np.sqrt(complex(w)))
    if r.real < 0 or (r.real == 0 and r.imag < 0):
        r = -r
    return r


@dataclass(frozen=True)
class CurvePoint:
    """A point of the curve.

    ``kind`` is ``"generic"``, ``"branch"`` or ``"infinity"``.  Generic points
    carry the actual ``y0`` so that moved points keep their sheet by
    continuation; ``sheet`` is the label of ``y0`` under the square-root
    convention.
    """

    kind: str
    x0: complex | None = None
    y0: complex | None = None
    sheet: int = 0
    index: int | None = None

    @property
    def chart(self) -> str:
        return {"generic": "x-x0", "branch": "y", "infinity": "x=t^-2"}[self.kind]

    @property
    def is_generic(self) -> bool:
        return self.kind == "generic"

    def sort_key(self):
        if self.kind == "infinity":
            return (np.inf, np.inf, 0)
        return (self.x0.real, self.x0.imag, self.sheet)

    def label(self) -> str:
        if self.kind == "infinity":
            return "inf"
        if self.kind == "branch":
            return f"branch[{self.index}]"
        return f"{'+' if self.sheet > 0 else '-'}"

    def __repr__(self):
        if self.kind == "infinity":
            return "CurvePoint(inf)"
        if self.kind == "branch":
            return f"CurvePoint(branch {self.x0:.6g})"
        return f"CurvePoint(x={self.x0:.6g}, y={self.y0:.6g})"


def _polish_roots(coeffs: np.ndarray, roots: np.ndarray, iters: int = 3) -> np.ndarray:
    d = P.polyder(coeffs)
    out = roots.copy()
    for _ in range(iters):
        fv = P.polyval(out, coeffs)
        dv = P.polyval(out, d)
        step = np.where(dv != 0, fv / np.where(dv != 0, dv, 1), 0)
        out = out - step
    return out


class HyperellipticCurve:
    """The odd model ``y^2 = f(x)``, ``deg f = 2g + 1``, ``g >= 3``.

    Parameters
    ----------
    f_coeffs : sequence of complex
        Coefficients of f in ascending order (``f_coeffs[k]`` multiplies ``x**k``).
    roots : sequence of complex, optional
        Exact roots of f; when given, ``f_coeffs`` is only used for the leading
        coefficient and consistency.  :meth:`from_roots` is the usual entry point.
    """

    def __init__(self, f_coeffs, roots=None, tol=DEFAULT_TOL, min_genus: int = 3):
        fc = asarray(f_coeffs)
        nz = np.nonzero(fc)[0]
        if nz.size == 0:
            raise PreconditionError("f is the zero polynomial")
        fc = fc[: nz[-1] + 1]
        deg = fc.size - 1
        if deg % 2 == 0:
            raise PreconditionError(f"deg f = {deg} is even; only odd models are supported")
        g = (deg - 1) // 2
        if g < min_genus:
            raise PreconditionError(f"genus {g} < {min_genus}")
        self.lead = complex(fc[-1])
        if roots is None:
            r = P.polyroots(fc)
            roots = _polish_roots(fc, r)
        roots = asarray(roots)
        if roots.size != deg:
            raise PreconditionError("number of roots does not match deg f")
        self.genus = g
        self.degree = deg
        self.branch_points = roots
        self.tol = tol
        self.center = complex(np.mean(roots))
        self.radius = float(max(1.0, np.max(np.abs(roots - self.center))))
        dist = np.where(np.eye(deg, dtype=bool), np.inf, np.abs(roots[:, None] - roots[None, :]))
        self.min_root_gap = float(np.min(dist))
        # a double root splits by ~sqrt(eps) in floating point, so the gap test is on sqrt(disc)
        if self.min_root_gap <= np.sqrt(tol.disc) * self.radius:
            raise PreconditionError(f"f is not squarefree (root gap {self.min_root_gap:.3g})")
        # f in the mapped variable, rebuilt from its roots
        beta = (roots - self.center) / self.radius
        self.f_xi = P.polyfromroots(beta) * (self.lead * self.radius ** deg)
        self.f_coeffs = self.xi_to_x(self.f_xi)

    @classmethod
    def from_roots(cls, roots, lead: complex = 1.0, **kw) -> "HyperellipticCurve":
        roots = asarray(roots)
        fc = P.polyfromroots(roots) * lead
        return cls(fc, roots=roots, **kw)

    @classmethod
    def default(cls) -> "HyperellipticCurve":
        """y^2 = x(x-1)(x-2)(x-3)(x-4)(x-5)(x-6), genus 3."""
        return cls.from_roots(np.arange(7, dtype=float))

    def __repr__(self):
        return f"HyperellipticCurve(g={self.genus}, roots={np.round(self.branch_points, 6).tolist()})"

    # variable changes
    def x_to_xi(self, cx) -> np.ndarray:
        """Coefficients in x -> coefficients in xi (x = center + radius*xi)."""
        cx = asarray(cx)
        lin = np.array([self.center, self.radius], dtype=DTYPE)
        out = np.zeros(1, dtype=DTYPE)
        for c in cx[::-1]:
            out = P.polyadd(P.polymul(out, lin), [c])
        return out

    def xi_to_x(self, cxi) -> np.ndarray:
        cxi = asarray(cxi)
        lin = np.array([-self.center / self.radius, 1.0 / self.radius], dtype=DTYPE)
        out = np.zeros(1, dtype=DTYPE)
        for c in cxi[::-1]:
            out = P.polyadd(P.polymul(out, lin), [c])
        return out

    def xi(self, x):
        return (np.asarray(x) - self.center) / self.radius

    def linear_factor_xi(self, r: complex) -> np.ndarray:
        """(x - r) as a polynomial in xi."""
        return np.array([self.center - r, self.radius], dtype=DTYPE)

    # evaluations
    def f(self, x):
        x = np.asarray(x, dtype=DTYPE)
        return self.lead * np.prod(x[..., None] - self.branch_points, axis=-1)

    def fprime_at_branch(self, i: int) -> complex:
        b = self.branch_points[i]
        others = np.delete(self.branch_points, i)
        return complex(self.lead * np.prod(b - others))

    # points
    def point(self, x0: complex, sheet: int = 1) -> CurvePoint:
        x0 = complex(x0)
        fx = complex(self.f(x0))
        if abs(fx) <= 1e-14 * max(1.0, abs(x0)) ** self.degree:
            raise PreconditionError(f"x0 = {x0} is a branch point; use branch_point()")
        if sheet not in (1, -1):
            raise PreconditionError("sheet must be +1 or -1")
        y0 = sheet * sqrt_conv(fx)
        return CurvePoint("generic", x0, y0, sheet)

    def point_with_y(self, x0: complex, y0: complex) -> CurvePoint:
        x0, y0 = complex(x0), complex(y0)
        s = sqrt_conv(self.f(x0))
        sheet = 1 if abs(y0 - s) <= abs(y0 + s) else -1
        return CurvePoint("generic", x0, sheet * s, sheet)

    def move(self, pt: CurvePoint, x_new: complex) -> CurvePoint:
        """Point over ``x_new`` on the sheet continuing ``pt`` (nearest root to its y)."""
        if pt.kind != "generic":
            raise PreconditionError("only generic points can be moved")
        s = sqrt_conv(self.f(complex(x_new)))
        y = s if abs(s - pt.y0) <= abs(s + pt.y0) else -s
        sheet = 1 if y == s else -1
        return CurvePoint("generic", complex(x_new), y, sheet)

    def branch_point(self, i: int) -> CurvePoint:
        return CurvePoint("branch", complex(self.branch_points[i]), 0j, 0, int(i))

    @cached_property
    def infinity(self) -> CurvePoint:
        return CurvePoint("infinity")

    def special_points(self) -> list[CurvePoint]:
        return [self.branch_point(i) for i in range(self.degree)] + [self.infinity]

    def conjugate(self, pt: CurvePoint) -> CurvePoint:
        """Hyperelliptic involution y -> -y."""
        if pt.kind != "generic":
            return pt
        return CurvePoint("generic", pt.x0, -pt.y0, -pt.sheet)

    def branch_index(self, x0: complex, tol: float = 1e-12) -> int | None:
        d = np.abs(self.branch_points - x0)
        i = int(np.argmin(d))
        return i if d[i] <= tol * self.radius else None

    def random_point(self, rng, scale: float = 3.0, margin: float = 0.15) -> CurvePoint:
        """Random generic point with x at least ``margin`` away from branch points."""
        while True:
            x0 = self.center + scale * (rng.standard_normal() + 1j * rng.standard_normal())
            if np.min(np.abs(self.branch_points - x0)) > margin:
                return self.point(x0, int(rng.choice([-1, 1])))

    # chart expansions
    def chart_x(self, pt: CurvePoint, n: int) -> LocalSeries:
        """x(t) in the standard chart at ``pt`` with relative precision ``n``."""
        if pt.kind == "generic":
            return LocalSeries.from_poly_coeffs([pt.x0, 1.0], n, pt)
        if pt.kind == "branch":
            w = self._branch_w(pt.index, n)
            return (w + complex(self.branch_points[pt.index])).with_anchor(pt)
        return LocalSeries.monomial(-2, n, 1.0, pt)

    def chart_w(self, pt: CurvePoint, n: int) -> LocalSeries:
        """x(t) - x(pt) for finite points (exact zero constant term)."""
        if pt.kind == "generic":
            return LocalSeries.monomial(1, n, 1.0, pt)
        if pt.kind == "branch":
            return self._branch_w(pt.index, n).with_anchor(pt)
        raise PreconditionError("no finite x-value at infinity")

    def _branch_w(self, i: int, n: int) -> LocalSeries:
        # t^2 = f(b + w) = w * G(w);  w = S(t^2) with S the reversion of w G(w)
        key = (i, n)
        cache = self.__dict__.setdefault("_wcache", {})
        if key in cache:
            return cache[key]
        b = self.branch_points[i]
        others = np.delete(self.branch_points, i)
        m = n // 2 + 2
        G = self.fprime_at_branch(i) * log1p_factor_series(b - others, np.ones(others.size), m)
        F = LocalSeries(G, 1)
        S = F.reversion()  # val 1, known to w^(m)
        Sc = S.window(0, S.prec)
        # substitute w -> t^2
        out = np.zeros(2 * S.prec, dtype=DTYPE)
        out[::2] = Sc
        ser = LocalSeries(out[2: 2 + n], 2)
        cache[key] = ser
        return ser

    def chart_y(self, pt: CurvePoint, n: int) -> LocalSeries:
        if pt.kind == "generic":
            c = pt.x0 - self.branch_points
            return LocalSeries(pt.y0 * log1p_factor_series(c, 0.5 * np.ones(c.size), n), 0, pt)
        if pt.kind == "branch":
            return LocalSeries.monomial(1, n, 1.0, pt)
        return LocalSeries(self._inf_unit(0.5, n), -(2 * self.genus + 1), pt) * sqrt_conv(self.lead)

    def _inf_unit(self, power: float, n: int, roots=None, mults=None) -> np.ndarray:
        """prod (1 - r t^2)^{m} as coefficients in t (default: branch points, all m = power)."""
        if roots is None:
            roots = self.branch_points
            mults = power * np.ones(roots.size)
        roots = asarray(roots)
        mults = np.asarray(mults, dtype=float)
        keep = roots != 0
        m = (n + 1) // 2 + 1
        s = log1p_factor_series(-1.0 / roots[keep], mults[keep], m)
        out = np.zeros(2 * m, dtype=DTYPE)
        out[::2] = s
        return out[:n]

    def chart_dxdt(self, pt: CurvePoint, n: int) -> LocalSeries:
        if pt.kind == "generic":
            return LocalSeries.constant(1.0, n, pt)
        if pt.kind == "branch":
            return self.chart_w(pt, n + 1).deriv()
        return LocalSeries.monomial(-3, n, -2.0, pt)

    def poly_series(self, cxi, pt: CurvePoint, n: int) -> LocalSeries:
        """p(xi(t)) for a polynomial ``p`` given by its xi-coefficients."""
        cxi = asarray(cxi)
        if pt.kind == "generic":
            return LocalSeries(taylor_shift(cxi, self.xi(pt.x0), n) * (1.0 / self.radius) ** np.arange(n), 0, pt)
        if pt.kind == "branch":
            beta = self.xi(self.branch_points[pt.index])
            tay = taylor_shift(cxi, beta, n // 2 + 2)
            u = self._branch_w(pt.index, n) * (1.0 / self.radius)
            return LocalSeries(tay, 0).compose(u).truncate(n).with_anchor(pt)
        # infinity: p(x) with x = t^-2
        cx = self.xi_to_x(cxi)
        nzc = np.nonzero(cx)[0]
        if nzc.size == 0:
            return LocalSeries(np.zeros(n), 0, pt)
        D = int(nzc[-1])
        rev = np.zeros(2 * D + 1, dtype=DTYPE)
        rev[::2] = cx[: D + 1][::-1]
        out = np.zeros(n, dtype=DTYPE)
        k = min(n, rev.size)
        out[:k] = rev[:k]
        return LocalSeries(out, -2 * D, pt)

    def den_inv_series(self, den, scale: complex, pt: CurvePoint, n: int) -> LocalSeries:
        """1 / (scale * prod (x - r)^m) in the chart at ``pt``; ``den`` is a sequence of (r, m)."""
        roots = np.array([r for r, _ in den], dtype=DTYPE)
        mults = np.array([m for _, m in den], dtype=float)
        if pt.kind == "generic":
            hit = roots == pt.x0
            c = pt.x0 - roots[~hit]
            const = np.prod(c ** (-mults[~hit])) / scale
            ser = log1p_factor_series(c, -mults[~hit], n) * const
            return LocalSeries(ser, -int(np.sum(mults[hit])), pt)
        if pt.kind == "branch":
            b = complex(self.branch_points[pt.index])
            hit = roots == b
            c = b - roots[~hit]
            const = np.prod(c ** (-mults[~hit])) / scale
            wcoef = log1p_factor_series(c, -mults[~hit], n // 2 + 2) * const
            w = self._branch_w(pt.index, n)
            ser = LocalSeries(wcoef, 0).compose(w).truncate(n).with_anchor(pt)
            k = int(np.sum(mults[hit]))
            if k:
                ser = ser * (w.with_anchor(pt) ** (-k))
            return ser
        M = int(np.sum(mults))
        unit = self._inf_unit(0, n, roots, -mults)
        return LocalSeries(unit / scale, 2 * M, pt)


def taylor_shift(c: np.ndarray, x0: complex, n: int) -> np.ndarray:
    """First ``n`` Taylor coefficients of the polynomial ``c`` about ``x0``."""
    a = asarray(c)
    out = np.zeros(n, dtype=DTYPE)
    fact = 1.0
    for k in range(min(n, a.size)):
        if k:
            a = P.polyder(a)
            fact *= k
        out[k] = P.polyval(x0, a) / fact
    return out
