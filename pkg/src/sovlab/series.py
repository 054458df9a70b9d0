"""Truncated Laurent series in a single local coordinate.

A series stores the lowest exponent ``val`` and ``n`` coefficients, so it is
known exactly up to (not including) ``t**(val + n)``.  Arithmetic follows the
usual precision rules: products keep the smaller relative precision, sums keep
the smaller absolute precision.
"""
from __future__ import annotations

import math
from numbers import Number

import numpy as np

from .errors import AnchorMismatch, SeriesError, TruncationError
from .scalar import DTYPE, asarray


def _join_anchor(a, b):
    if a is None:
        return b
    if b is None or a == b:
        return a
    raise AnchorMismatch(f"series anchored at different points: {a!r} vs {b!r}")


class LocalSeries:
    """Laurent series ``t**val * (c0 + c1 t + ... + c_{n-1} t**(n-1) + O(t**n))``.

    Parameters
    ----------
    coeffs : array_like
        Coefficients starting at exponent ``val``.
    val : int
        Exponent of ``coeffs[0]``.
    anchor : hashable, optional
        Chart the series lives in.  Operations between series with distinct
        non-None anchors raise :class:`AnchorMismatch`.
    """

    __slots__ = ("coeffs", "val", "anchor")

    def __init__(self, coeffs, val: int = 0, anchor=None):
        c = asarray(coeffs).ravel().copy()
        if c.size < 1:
            raise TruncationError("series needs at least one known coefficient")
        c.flags.writeable = False
        self.coeffs = c
        self.val = int(val)
        self.anchor = anchor

    # construction helpers
    @classmethod
    def constant(cls, c, n: int, anchor=None) -> "LocalSeries":
        out = np.zeros(n, dtype=DTYPE)
        out[0] = c
        return cls(out, 0, anchor)

    @classmethod
    def monomial(cls, k: int, n: int, c=1.0, anchor=None) -> "LocalSeries":
        out = np.zeros(n, dtype=DTYPE)
        out[0] = c
        return cls(out, k, anchor)

    @classmethod
    def variable(cls, n: int, anchor=None) -> "LocalSeries":
        return cls.monomial(1, n, 1.0, anchor)

    @classmethod
    def from_poly_coeffs(cls, coeffs, n: int, anchor=None) -> "LocalSeries":
        """Exact polynomial ``sum coeffs[k] t**k`` truncated to ``n`` terms."""
        out = np.zeros(n, dtype=DTYPE)
        c = asarray(coeffs)[:n]
        out[: c.size] = c
        return cls(out, 0, anchor)

    # basic properties
    @property
    def n(self) -> int:
        return self.coeffs.size

    @property
    def prec(self) -> int:
        """Absolute precision: the series is known modulo ``t**prec``."""
        return self.val + self.n

    def coeff(self, k: int) -> complex:
        if k >= self.prec:
            raise TruncationError(f"coefficient t^{k} beyond truncation t^{self.prec}")
        if k < self.val:
            return 0j
        return complex(self.coeffs[k - self.val])

    def window(self, k0: int, k1: int) -> np.ndarray:
        """Coefficients of exponents ``k0 .. k1-1``."""
        if k1 > self.prec:
            raise TruncationError(f"coefficient t^{k1 - 1} beyond truncation t^{self.prec}")
        out = np.zeros(k1 - k0, dtype=DTYPE)
        lo = max(k0, self.val)
        if lo < k1:
            out[lo - k0:] = self.coeffs[lo - self.val: k1 - self.val]
        return out

    def with_anchor(self, anchor) -> "LocalSeries":
        return LocalSeries(self.coeffs, self.val, anchor)

    def truncate(self, n: int) -> "LocalSeries":
        """Keep at most ``n`` coefficients (relative)."""
        if n < 1:
            raise TruncationError("truncation order < 1")
        return LocalSeries(self.coeffs[:n], self.val, self.anchor)

    def truncate_abs(self, prec: int) -> "LocalSeries":
        return self.truncate(prec - self.val)

    def shift(self, k: int) -> "LocalSeries":
        """Multiply by ``t**k``."""
        return LocalSeries(self.coeffs, self.val + k, self.anchor)

    def strip(self, rel: float = 0.0) -> "LocalSeries":
        """Drop leading coefficients with ``|c| <= rel * max|c|`` (exact zeros by default)."""
        c = self.coeffs
        scale = float(np.max(np.abs(c))) if c.size else 0.0
        thresh = rel * scale
        nz = np.nonzero(np.abs(c) > thresh)[0]
        if nz.size == 0:
            raise SeriesError("series is zero to its truncation order")
        k = int(nz[0])
        return LocalSeries(c[k:], self.val + k, self.anchor)

    def valuation(self, rel: float = 1e-8) -> int:
        return self.strip(rel).val

    def is_zero(self, rel: float = 0.0, abs_tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.coeffs) <= abs_tol))

    def leading(self) -> complex:
        return complex(self.coeffs[0])

    def __repr__(self):
        terms = ", ".join(f"{c:.4g}" for c in self.coeffs[:6])
        more = ", ..." if self.n > 6 else ""
        return f"LocalSeries(val={self.val}, n={self.n}, [{terms}{more}])"

    # arithmetic
    def _coerce(self, other):
        if isinstance(other, LocalSeries):
            _join_anchor(self.anchor, other.anchor)
            return other
        if isinstance(other, (Number, np.number)):
            return None
        return NotImplemented

    def __neg__(self):
        return LocalSeries(-self.coeffs, self.val, self.anchor)

    def __pos__(self):
        return self

    def _add_scalar(self, c) -> "LocalSeries":
        if self.prec <= 0:
            raise TruncationError("adding a constant to a series known only below t^0")
        lo = min(self.val, 0)
        out = self.window(lo, self.prec)
        out[-lo] += c
        return LocalSeries(out, lo, self.anchor)

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o is None:
            return self._add_scalar(other)
        anchor = _join_anchor(self.anchor, o.anchor)
        lo = min(self.val, o.val)
        hi = min(self.prec, o.prec)
        if hi <= lo:
            raise TruncationError("sum has no known coefficients (truncation order < 1)")
        out = self.window(lo, hi) + o.window(lo, hi)
        return LocalSeries(out, lo, anchor)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, LocalSeries):
            return self + (-other)
        if isinstance(other, (Number, np.number)):
            return self._add_scalar(-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o is None:
            return LocalSeries(self.coeffs * other, self.val, self.anchor)
        anchor = _join_anchor(self.anchor, o.anchor)
        n = min(self.n, o.n)
        out = np.convolve(self.coeffs[:n], o.coeffs[:n])[:n]
        return LocalSeries(out, self.val + o.val, anchor)

    __rmul__ = __mul__

    def inverse(self) -> "LocalSeries":
        s = self.strip(0.0)
        a = s.coeffs
        n = a.size
        b = np.zeros(n, dtype=DTYPE)
        a0 = a[0]
        b[0] = 1.0 / a0
        for k in range(1, n):
            b[k] = -np.dot(a[1:k + 1], b[k - 1::-1]) / a0
        return LocalSeries(b, -s.val, self.anchor)

    def __truediv__(self, other):
        if isinstance(other, LocalSeries):
            if np.all(other.coeffs == 0):
                raise SeriesError("division by a zero series")
            return self * other.inverse()
        if isinstance(other, (Number, np.number)):
            if other == 0:
                raise SeriesError("division by zero")
            return LocalSeries(self.coeffs / other, self.val, self.anchor)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (Number, np.number)):
            return self.inverse() * other
        return NotImplemented

    def __pow__(self, k):
        if isinstance(k, (int, np.integer)):
            k = int(k)
            if k < 0:
                return self.inverse() ** (-k)
            out = LocalSeries.monomial(0, self.n, 1.0, self.anchor)
            base = self
            while k:
                if k & 1:
                    out = out * base
                k >>= 1
                if k:
                    base = base * base
            return out
        return self.power(k)

    def power(self, alpha: float, lead=None) -> "LocalSeries":
        """``self**alpha`` for non-integer ``alpha``.

        ``val * alpha`` must be an integer.  ``lead`` selects the branch: the
        leading coefficient of the result is the ``alpha``-th root of the
        leading coefficient closest to ``lead`` (principal root by default).
        """
        s = self.strip(0.0)
        v = s.val * alpha
        if abs(v - round(v)) > 1e-12:
            raise SeriesError(f"t^{s.val} has no single-valued power {alpha}")
        a = s.coeffs
        n = a.size
        a0 = a[0]
        b = np.zeros(n, dtype=DTYPE)
        b0 = complex(a0) ** alpha
        if lead is not None:
            # pick among the branches b0 * exp(2 pi i j alpha)
            den = _rational_den(alpha)
            cands = [b0 * np.exp(2j * np.pi * alpha * j) for j in range(den)]
            b0 = min(cands, key=lambda c: abs(c - lead))
        b[0] = b0
        for k in range(1, n):
            j = np.arange(1, k + 1)
            b[k] = np.dot(((alpha + 1) * j - k) * a[1:k + 1], b[k - j]) / (k * a0)
        return LocalSeries(b, int(round(v)), self.anchor)

    def sqrt(self, lead=None) -> "LocalSeries":
        if self.strip(0.0).val % 2:
            raise SeriesError("odd valuation has no square root as a Laurent series")
        return self.power(0.5, lead)

    def deriv(self) -> "LocalSeries":
        """d/dt."""
        c = self.coeffs
        k = np.arange(self.val, self.prec)
        out = c * k
        if self.val == 0:
            if self.n < 2:
                raise TruncationError("derivative of a series known only to t^0")
            return LocalSeries(out[1:], 0, self.anchor)
        if self.val > 0:
            return LocalSeries(out, self.val - 1, self.anchor)
        # negative valuation: exponent 0 term lives inside, its derivative is 0
        return LocalSeries(out, self.val - 1, self.anchor)

    def compose(self, inner: "LocalSeries") -> "LocalSeries":
        """``self(inner(t))``; ``inner`` must vanish at t = 0."""
        if not isinstance(inner, LocalSeries):
            raise TypeError("compose expects a LocalSeries")
        s = inner.strip(0.0)
        vs = s.val
        if vs < 1:
            raise SeriesError("composition needs an inner series with positive valuation")
        r = self.strip(0.0) if np.any(self.coeffs != 0) else self
        N = min(s.n, vs * r.n)
        sigma = s.coeffs[:N]
        acc = np.zeros(N, dtype=DTYPE)
        powj = np.zeros(N, dtype=DTYPE)
        powj[0] = 1.0
        for j in range(r.n):
            off = vs * j
            if off >= N:
                break
            acc[off:] += r.coeffs[j] * powj[: N - off]
            powj = np.convolve(powj, sigma)[:N]
        unit = LocalSeries(sigma, 0) ** r.val if r.val else None
        if unit is not None:
            acc = np.convolve(acc, unit.coeffs)[:N]
        return LocalSeries(acc, vs * r.val, inner.anchor)

    def reversion(self) -> "LocalSeries":
        """Compositional inverse of a series ``a1 t + a2 t^2 + ...`` with ``a1 != 0``."""
        s = self
        if s.prec < 2:
            raise TruncationError("reversion needs the linear coefficient")
        c0 = s.coeff(0) if s.val <= 0 else 0
        if s.val < 0 or abs(c0) != 0:
            raise SeriesError("reversion needs a series vanishing at 0")
        a1 = s.coeff(1)
        if a1 == 0:
            raise SeriesError("reversion needs a nonzero linear coefficient")
        n = s.prec - 1
        t = LocalSeries.variable(n, self.anchor)
        r = t * (1.0 / a1)
        ds = s.deriv()
        for _ in range(int(math.ceil(math.log2(max(n, 2)))) + 2):
            err = s.compose(r) - t
            r = r - err / ds.compose(r)
            r = r.truncate_abs(n + 1)
        return r

    def evaluate(self, t: complex) -> complex:
        """Sum of the known terms at ``t`` (diagnostic use)."""
        k = np.arange(self.val, self.prec)
        return complex(np.sum(self.coeffs * np.power(complex(t), k)))

    def allclose(self, other: "LocalSeries", tol: float, k1: int | None = None) -> bool:
        lo = min(self.val, other.val)
        hi = min(self.prec, other.prec) if k1 is None else k1
        a, b = self.window(lo, hi), other.window(lo, hi)
        scale = max(1.0, float(np.max(np.abs(a), initial=0.0)), float(np.max(np.abs(b), initial=0.0)))
        return bool(np.max(np.abs(a - b), initial=0.0) <= tol * scale)


def _rational_den(alpha: float, maxden: int = 64) -> int:
    from fractions import Fraction

    return Fraction(alpha).limit_denominator(maxden).denominator


def log1p_factor_series(roots, mults, n: int) -> np.ndarray:
    """Coefficients of ``prod_j (1 + t/r_j)**m_j`` to order ``n``.

    Computed as ``exp(sum_j m_j log(1 + t/r_j))``; exponents may be fractional.
    """
    roots = asarray(roots)
    mults = np.asarray(mults, dtype=float)
    L = np.zeros(n, dtype=DTYPE)
    if roots.size:
        inv = 1.0 / roots
        p = np.ones_like(inv)
        for k in range(1, n):
            p = p * inv
            L[k] = ((-1) ** (k + 1)) * np.dot(mults, p) / k
    return exp_series(L)


def exp_series(L: np.ndarray) -> np.ndarray:
    """``exp`` of a power series with zero constant term."""
    n = L.size
    E = np.zeros(n, dtype=DTYPE)
    E[0] = 1.0
    kL = L * np.arange(n)
    for k in range(1, n):
        E[k] = np.dot(kL[1:k + 1], E[k - 1::-1]) / k
    return E
