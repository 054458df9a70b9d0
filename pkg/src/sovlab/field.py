"""Function-field elements (a + b y) / d and (quadratic) differentials.

Numerators are polynomials in the mapped variable ``xi`` of the curve;
denominators are kept in factored form ``scale * prod (x - r)^m`` so that
expansions at the roots are exact powers of the local coordinate.
"""
from __future__ import annotations

from numbers import Number

import numpy as np
from numpy.polynomial import polynomial as P

from .curve import CurvePoint, HyperellipticCurve
from .errors import PreconditionError, SeriesError
from .scalar import DTYPE, asarray
from .series import LocalSeries


def _trim(c) -> np.ndarray:
    c = asarray(c)
    if c.size == 0:
        return np.zeros(1, dtype=DTYPE)
    nz = np.nonzero(c)[0]
    if nz.size == 0:
        return np.zeros(1, dtype=DTYPE)
    return c[: nz[-1] + 1].copy()


def _padd(a, b):
    return P.polyadd(a, b)


def _pmul(a, b):
    return P.polymul(a, b)


def _den_dict(den) -> dict:
    out: dict = {}
    for r, m in den:
        out[complex(r)] = out.get(complex(r), 0) + int(m)
    return out


def _den_tuple(d: dict) -> tuple:
    items = [(r, m) for r, m in d.items() if m != 0]
    items.sort(key=lambda rm: (rm[0].real, rm[0].imag))
    return tuple(items)


class FieldElem:
    """Element ``(a(xi) + b(xi) y) / (scale * prod (x - r)^m)`` of the function field."""

    __slots__ = ("curve", "a", "b", "den", "scale")

    def __init__(self, curve: HyperellipticCurve, a, b=None, den=(), scale: complex = 1.0):
        self.curve = curve
        self.a = _trim(a)
        self.b = _trim([0.0] if b is None else b)
        d = _den_dict(den)
        if any(m < 0 for m in d.values()):
            # negative multiplicities become numerator factors
            num = np.ones(1, dtype=DTYPE)
            for r, m in list(d.items()):
                if m < 0:
                    for _ in range(-m):
                        num = _pmul(num, curve.linear_factor_xi(r))
                    d[r] = 0
            self.a = _trim(_pmul(self.a, num))
            self.b = _trim(_pmul(self.b, num))
        self.den = _den_tuple(d)
        if scale == 0:
            raise ZeroDivisionError("denominator scale is zero")
        self.scale = complex(scale)

    # constructors
    @classmethod
    def const(cls, curve, c) -> "FieldElem":
        return cls(curve, [c])

    @classmethod
    def x(cls, curve) -> "FieldElem":
        return cls(curve, curve.x_to_xi([0.0, 1.0]))

    @classmethod
    def y(cls, curve) -> "FieldElem":
        return cls(curve, [0.0], [1.0])

    @classmethod
    def from_x_poly(cls, curve, a_x, b_x=None, den=(), scale=1.0) -> "FieldElem":
        """Build from numerators given in the monomial x-basis."""
        b = curve.x_to_xi(b_x) if b_x is not None else None
        return cls(curve, curve.x_to_xi(a_x), b, den, scale)

    def _like(self, a, b, den, scale=1.0):
        return FieldElem(self.curve, a, b, den, scale)

    def __repr__(self):
        return (f"FieldElem(deg a={self.a.size - 1}, deg b={self.b.size - 1}, "
                f"den={[(complex(np.round(r, 6)), m) for r, m in self.den]})")

    # algebra
    def is_zero(self) -> bool:
        return not (np.any(self.a) or np.any(self.b))

    def _coerce(self, other):
        if isinstance(other, FieldElem):
            if other.curve is not self.curve:
                raise PreconditionError("elements live on different curves")
            return other
        if isinstance(other, (Number, np.number)):
            return FieldElem.const(self.curve, other)
        return NotImplemented

    def __neg__(self):
        return self._like(-self.a, -self.b, self.den, self.scale)

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o.is_zero():
            return self
        if self.is_zero():
            return o
        d1, d2 = dict(self.den), dict(o.den)
        lcm = {r: max(d1.get(r, 0), d2.get(r, 0)) for r in set(d1) | set(d2)}
        f1 = self._factor_poly({r: lcm[r] - d1.get(r, 0) for r in lcm})
        f2 = self._factor_poly({r: lcm[r] - d2.get(r, 0) for r in lcm})
        a = _padd(_pmul(self.a, f1) / self.scale, _pmul(o.a, f2) / o.scale)
        b = _padd(_pmul(self.b, f1) / self.scale, _pmul(o.b, f2) / o.scale)
        return self._like(a, b, _den_tuple(lcm)).reduce()

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (Number, np.number)):
            return self._like(self.a * other, self.b * other, self.den, self.scale)
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        f = self.curve.f_xi
        a = _padd(_pmul(self.a, o.a), _pmul(_pmul(self.b, o.b), f))
        b = _padd(_pmul(self.a, o.b), _pmul(self.b, o.a))
        den = _den_dict(self.den + o.den)
        return self._like(a, b, _den_tuple(den), self.scale * o.scale).reduce()

    __rmul__ = __mul__

    def norm_poly(self) -> np.ndarray:
        """a^2 - f b^2 (xi-coefficients): the numerator times its conjugate."""
        return _trim(P.polysub(_pmul(self.a, self.a), _pmul(_pmul(self.b, self.b), self.curve.f_xi)))

    def conj(self) -> "FieldElem":
        """Image under the hyperelliptic involution y -> -y."""
        return self._like(self.a, -self.b, self.den, self.scale)

    def inverse(self) -> "FieldElem":
        if self.is_zero():
            raise ZeroDivisionError("inverse of the zero element")
        c = self.curve
        nrm = self.norm_poly()
        # deflate the exactly known roots (branch points, current poles) first
        known = [complex(b) for b in c.branch_points] + [r for r, _ in self.den]
        den: dict = {}
        scl = float(np.max(np.abs(nrm)))
        for r in known:
            rho = complex(c.xi(r))
            while nrm.size > 1:
                val = abs(P.polyval(rho, nrm))
                if val > 1e-10 * scl * max(1.0, abs(rho)) ** nrm.size:
                    break
                nrm = _trim(_deflate(nrm, rho))
                den[r] = den.get(r, 0) + 1
        roots = P.polyroots(nrm) if nrm.size > 1 else np.zeros(0, dtype=DTYPE)
        for rho in roots:
            r = c.center + c.radius * complex(rho)
            den[r] = den.get(r, 0) + 1
        # N = lead * prod (xi - rho) = lead * radius^-deg * prod (x - r)
        deg = sum(den.values())
        out_scale = complex(nrm[-1]) / c.radius ** deg
        old = self._factor_poly(dict(self.den))
        return FieldElem(c, _pmul(self.a, old) * self.scale, _pmul(-self.b, old) * self.scale,
                         _den_tuple(den), out_scale).reduce()

    def __truediv__(self, other):
        if isinstance(other, (Number, np.number)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return self._like(self.a, self.b, self.den, self.scale * other)
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = FieldElem.const(self.curve, 1.0)
        for _ in range(k):
            out = out * self
        return out

    def _factor_poly(self, mults: dict) -> np.ndarray:
        out = np.ones(1, dtype=DTYPE)
        for r, m in mults.items():
            for _ in range(m):
                out = _pmul(out, self.curve.linear_factor_xi(r))
        return out

    def reduce(self, rel: float = 1e-10) -> "FieldElem":
        """Cancel denominator factors that divide both numerator polynomials."""
        if not self.den:
            return self
        c = self.curve
        a, b = self.a, self.b
        d = dict(self.den)
        na = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))), 1e-300)
        changed = False
        for r in list(d):
            rho = complex(c.xi(r))
            while d[r] > 0:
                sc = max(1.0, abs(rho)) ** max(a.size, b.size)
                va, vb = P.polyval(rho, a), P.polyval(rho, b)
                if abs(va) > rel * na * sc or abs(vb) > rel * na * sc:
                    break
                a = _trim(_deflate(a, rho)) / c.radius
                b = _trim(_deflate(b, rho)) / c.radius
                d[r] -= 1
                changed = True
            if a.size == 1 and a[0] == 0 and b.size == 1 and b[0] == 0:
                break
        if not changed:
            return self
        return self._like(a, b, _den_tuple(d), self.scale)

    def deriv(self) -> "FieldElem":
        """d/dx, using 2 y y' = f'."""
        c = self.curve
        f = c.f_xi
        fp = P.polyder(f) / c.radius
        ap = P.polyder(self.a) / c.radius if self.a.size > 1 else np.zeros(1)
        bp = P.polyder(self.b) / c.radius if self.b.size > 1 else np.zeros(1)
        roots = [r for r, _ in self.den]
        Pp = np.ones(1, dtype=DTYPE)
        for r in roots:
            Pp = _pmul(Pp, c.linear_factor_xi(r))
        S = np.zeros(1, dtype=DTYPE)
        for j, (r, m) in enumerate(self.den):
            term = np.ones(1, dtype=DTYPE) * m
            for i, r2 in enumerate(roots):
                if i != j:
                    term = _pmul(term, c.linear_factor_xi(r2))
            S = _padd(S, term)
        a_new = P.polysub(_pmul(_pmul(2 * f, ap), Pp), _pmul(_pmul(2 * f, self.a), S))
        b_new = P.polysub(_pmul(_padd(_pmul(2 * f, bp), _pmul(self.b, fp)), Pp),
                          _pmul(_pmul(2 * f, self.b), S))
        den = _den_dict(self.den)
        for r in roots:
            den[r] += 1
        # 2f = 2 lead prod (x - b_i)
        for bpt in c.branch_points:
            key = complex(bpt)
            den[key] = den.get(key, 0) + 1
        return self._like(a_new, b_new, _den_tuple(den), self.scale * 2 * c.lead).reduce()

    # local data
    def expand_at(self, pt: CurvePoint, order: int = 8) -> LocalSeries:
        """Laurent series in the standard chart at ``pt`` with ``order`` coefficients."""
        if order < 1:
            raise SeriesError("truncation order < 1")
        c = self.curve
        n = order
        for _ in range(6):
            A = c.poly_series(self.a, pt, n)
            if np.any(self.b):
                B = c.poly_series(self.b, pt, n) * c.chart_y(pt, n)
                num = A + B
            else:
                num = A
            out = num * c.den_inv_series(self.den, self.scale, pt, n)
            if not np.any(out.coeffs != 0):
                n += order
                continue
            out = out.strip(0.0)
            if out.n >= order:
                return out.truncate(order)
            n += order - out.n + 2
        return out

    def evaluate(self, pt: CurvePoint) -> complex:
        """Value at a generic point (no pole allowed)."""
        if pt.kind == "generic":
            c = self.curve
            if any(r == pt.x0 for r, _ in self.den):
                s = self.expand_at(pt, 3)
                return _constant_term(s)
            xi0 = c.xi(pt.x0)
            num = P.polyval(xi0, self.a) + P.polyval(xi0, self.b) * pt.y0
            d = self.scale
            for r, m in self.den:
                d *= (pt.x0 - r) ** m
            return complex(num / d)
        return _constant_term(self.expand_at(pt, 3))

    def __call__(self, pt):
        return self.evaluate(pt)


def _constant_term(s: LocalSeries, rel: float = 1e-9) -> complex:
    if s.val < 0:
        neg = s.window(s.val, 0)
        scale = max(1.0, float(np.max(np.abs(s.coeffs))))
        if np.max(np.abs(neg)) > rel * scale:
            raise SeriesError("element has a pole here")
    return s.coeff(0)


def _deflate(c: np.ndarray, rho: complex) -> np.ndarray:
    """Quotient of c by (xi - rho), remainder dropped."""
    n = c.size
    if n == 1:
        return np.zeros(1, dtype=DTYPE)
    q = np.zeros(n - 1, dtype=DTYPE)
    acc = c[-1]
    q[-1] = acc
    for j in range(n - 2, 0, -1):
        acc = c[j] + rho * acc
        q[j - 1] = acc
    return q


# lazy expressions -----------------------------------------------------------

class FieldExpr:
    """Unevaluated combination of field elements, expanded through series arithmetic.

    Keeps potentials built from many forms at their natural (small) degrees;
    forming them as a single ``FieldElem`` would multiply denominators out.
    Leaves are any object with ``expand_at(pt, order)``.
    """

    __slots__ = ("op", "args", "curve")

    def __init__(self, op, args, curve):
        self.op = op
        self.args = args
        self.curve = curve

    @classmethod
    def wrap(cls, obj) -> "FieldExpr":
        if isinstance(obj, FieldExpr):
            return obj
        return cls("leaf", (obj,), getattr(obj, "curve", None))

    def _bin(self, op, other):
        if isinstance(other, (Number, np.number)):
            other = FieldExpr("const", (complex(other),), self.curve)
        return FieldExpr(op, (self, FieldExpr.wrap(other)), self.curve)

    def __add__(self, o):
        return self._bin("add", o)

    __radd__ = __add__

    def __sub__(self, o):
        return self._bin("add", -FieldExpr.wrap(o) if not isinstance(o, (Number, np.number)) else -o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        return self._bin("mul", o)

    __rmul__ = __mul__

    def __truediv__(self, o):
        return self._bin("div", o)

    def __neg__(self):
        return FieldExpr("scale", (self, -1.0), self.curve)

    def deriv(self) -> "FieldExpr":
        return FieldExpr("deriv", (self,), self.curve)

    def expand_at(self, pt: CurvePoint, order: int = 8) -> LocalSeries:
        op, a = self.op, self.args
        if op == "leaf":
            return a[0].expand_at(pt, order)
        if op == "const":
            return LocalSeries.constant(a[0], order, pt)
        if op == "scale":
            return a[0].expand_at(pt, order) * a[1]
        if op == "add":
            return a[0].expand_at(pt, order) + a[1].expand_at(pt, order)
        if op == "mul":
            return a[0].expand_at(pt, order) * a[1].expand_at(pt, order)
        if op == "div":
            return a[0].expand_at(pt, order) / a[1].expand_at(pt, order)
        if op == "deriv":
            s = a[0].expand_at(pt, order + 1)
            return s.deriv() / self.curve.chart_dxdt(pt, order + 1)
        raise ValueError(op)

    def evaluate(self, pt: CurvePoint) -> complex:
        return _constant_term(self.expand_at(pt, 3))


# differentials --------------------------------------------------------------

class Differential:
    """``coeff * dx**degree`` with degree 1 (abelian) or 2 (quadratic)."""

    __slots__ = ("coeff", "degree")

    def __init__(self, coeff, degree: int = 1):
        if degree not in (1, 2):
            raise PreconditionError("degree must be 1 (abelian) or 2 (quadratic)")
        self.coeff = coeff
        self.degree = degree

    @property
    def curve(self):
        return self.coeff.curve

    @property
    def tag(self) -> str:
        return "abelian" if self.degree == 1 else "quadratic"

    def __repr__(self):
        return f"Differential({self.tag}, {self.coeff!r})"

    def _same(self, other):
        if not isinstance(other, Differential) or other.degree != self.degree:
            raise PreconditionError("differentials of different degree")
        return other

    def __add__(self, other):
        o = self._same(other)
        return Differential(self.coeff + o.coeff, self.degree)

    def __sub__(self, other):
        o = self._same(other)
        return Differential(self.coeff - o.coeff, self.degree)

    def __neg__(self):
        return Differential(-self.coeff, self.degree)

    def __mul__(self, other):
        if isinstance(other, Differential):
            if self.degree + other.degree > 2:
                raise PreconditionError("product degree above 2")
            return Differential(self.coeff * other.coeff, self.degree + other.degree)
        return Differential(self.coeff * other, self.degree)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Differential(self.coeff / other, self.degree)

    def expand_at(self, pt: CurvePoint, order: int = 8) -> LocalSeries:
        s = self.coeff.expand_at(pt, order)
        if pt.kind == "generic":
            return s
        dxdt = self.curve.chart_dxdt(pt, order)
        out = s * (dxdt if self.degree == 1 else dxdt * dxdt)
        return out.strip(0.0) if np.any(out.coeffs != 0) else out

    def evaluate(self, pt: CurvePoint) -> complex:
        """Value of the coefficient in the standard chart at ``pt``."""
        return _constant_term(self.expand_at(pt, 3))

    def __call__(self, pt):
        return self.evaluate(pt)

    def is_zero(self) -> bool:
        return self.coeff.is_zero()


def expand_at(obj, pt: CurvePoint, order: int = 8) -> LocalSeries:
    """Laurent expansion of a FieldElem / Differential / expression in the chart at ``pt``."""
    if order < 1:
        raise SeriesError("truncation order < 1")
    return obj.expand_at(pt, order)


def residue(d: Differential, pt: CurvePoint, order: int = 8) -> complex:
    """Coefficient of t^-1 dt in the standard chart."""
    if d.degree != 1:
        raise PreconditionError("residue needs an abelian differential")
    s = d.expand_at(pt, order)
    if s.prec <= -1:
        raise SeriesError("insufficient truncation order for the residue")
    return s.coeff(-1)
