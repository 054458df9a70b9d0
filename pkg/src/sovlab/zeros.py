"""Zero loci of function-field elements and differentials."""
from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as P

from .config import DEFAULT_TOL, Tolerances
from .curve import CurvePoint, HyperellipticCurve
from .errors import RootFindingError, SeriesError
from .field import Differential, FieldElem, _deflate, _trim
from .series import LocalSeries


def chart_radius(curve: HyperellipticCurve, pt: CurvePoint, extra=()) -> float:
    """Half the distance (in the chart) to the nearest other special x-value."""
    if pt.kind == "infinity":
        return 0.5 / max(1.0, float(np.max(np.abs(curve.branch_points))) ** 0.5)
    xs = [complex(b) for b in curve.branch_points] + [complex(e) for e in extra]
    d = [abs(pt.x0 - x) for x in xs if abs(pt.x0 - x) > 0]
    rho = 0.5 * min(d) if d else 1.0
    if pt.kind == "branch":
        rho = rho ** 0.5 * abs(curve.fprime_at_branch(pt.index)) ** 0.5
    return rho


def scaled_valuation(s: LocalSeries, rho: float, rel: float) -> int:
    """Valuation after rescaling t -> rho t, counting ``|c| <= rel * max`` as zero."""
    k = np.arange(s.val, s.prec)
    sc = np.abs(s.coeffs) * rho ** (k - s.val)
    m = sc.max()
    if m == 0:
        raise SeriesError("series vanishes to its truncation order")
    nz = np.nonzero(sc > rel * m)[0]
    return int(s.val + nz[0])


def _elem_and_degree(obj):
    if isinstance(obj, Differential):
        return obj.coeff, obj.degree
    return obj, 0


def _local_order(obj, pt, rho, tol, order=10) -> int:
    s = obj.expand_at(pt, order)
    return scaled_valuation(s, rho, tol.valuation)


def divisor(obj, tol: Tolerances = DEFAULT_TOL, exclude=()) -> tuple[list, list]:
    """(zeros, poles) as lists of (CurvePoint, multiplicity)."""
    elem, deg = _elem_and_degree(obj)
    if elem.is_zero():
        raise SeriesError("zero element has no divisor")
    c = elem.curve
    N = elem.norm_poly()
    scaleN = float(np.max(np.abs(N)))
    zeros: list = []
    poles: list = []
    den = dict(elem.den)
    extra = list(den)
    done_x: set = set()

    def deflate(r, k):
        nonlocal N
        rho = complex(c.xi(r))
        for _ in range(k):
            if N.size <= 1:
                break
            N = _trim(_deflate(N, rho))

    def record(pt, v):
        if v > 0:
            zeros.append((pt, v))
        elif v < 0:
            poles.append((pt, -v))

    # branch points: order of the numerator in t = y equals its x-order in N
    for i, b in enumerate(c.branch_points):
        pt = c.branch_point(i)
        rho = chart_radius(c, pt, extra)
        v = _local_order(obj, pt, rho, tol)
        m = den.get(complex(b), 0)
        v_elem = v - deg  # dx = (2t/f'(b) + ...) dt adds one per degree
        deflate(complex(b), v_elem + 2 * m)
        record(pt, v)
        done_x.add(complex(b))
    # fibres of the remaining denominator roots
    for r, m in den.items():
        if r in done_x:
            continue
        y0 = complex(np.sqrt(c.f(r)))
        tot = 0
        for pt in (c.point_with_y(r, y0), c.point_with_y(r, -y0)):
            rho = chart_radius(c, pt, extra)
            v = _local_order(obj, pt, rho, tol)
            tot += v + m
            record(pt, v)
        deflate(r, tot)
        done_x.add(r)
    for pt, m in exclude:
        deflate(pt.x0, m)
        zeros.append((pt, m))
        done_x.add(pt.x0)
    # infinity
    pt = c.infinity
    record(pt, _local_order(obj, pt, chart_radius(c, pt), tol))
    # remaining finite zeros from the norm polynomial
    if N.size > 1:
        for x0, mult, pt in _norm_roots(c, elem, N, scaleN, tol):
            zeros.append((pt, mult))
    zeros.sort(key=lambda pm: pm[0].sort_key())
    poles.sort(key=lambda pm: pm[0].sort_key())
    return zeros, poles


def _norm_roots(c, elem, N, scaleN, tol):
    roots = P.polyroots(N)
    dN = P.polyder(N)
    for _ in range(2):
        dv = P.polyval(roots, dN)
        ok = np.abs(dv) > 1e-300
        roots = np.where(ok, roots - P.polyval(roots, N) / np.where(ok, dv, 1.0), roots)
    xs = c.center + c.radius * roots
    # polish every root along its sheet, then merge clusters
    pol = []
    for x0 in xs:
        x0 = complex(x0)
        y0 = complex(np.sqrt(c.f(x0)))
        xi0 = complex(c.xi(x0))
        a0, b0 = complex(P.polyval(xi0, elem.a)), complex(P.polyval(xi0, elem.b))
        y = y0 if abs(a0 + b0 * y0) <= abs(a0 - b0 * y0) else -y0
        pol.append(_newton_on_sheet(c, elem, x0, y))
    px = np.array([p[0] for p in pol])
    used = np.zeros(px.size, dtype=bool)
    out = []
    for i in np.lexsort((px.imag, px.real)):
        if used[i]:
            continue
        grp = np.nonzero((~used) & (np.abs(px - px[i]) <= tol.cluster * max(1.0, abs(px[i]))))[0]
        used[grp] = True
        if grp.size == 1:
            x0, y = pol[i]
            out.append((x0, 1, c.point_with_y(x0, y)))
        else:
            x0 = complex(np.mean(px[grp]))
            out.extend(_resolve_cluster(c, elem, x0, int(grp.size), [pol[k][1] for k in grp]))
    for x0, mult, pt in out:
        if mult == 1:
            xi0 = complex(c.xi(x0))
            res = abs(P.polyval(xi0, N)) / (scaleN * max(1.0, abs(xi0)) ** (N.size - 1))
            if res > 1e-6:
                raise RootFindingError(f"root at {x0} not converged", residual=res)
    return out


def _resolve_cluster(c, elem, x0, mult, ys):
    xi0 = complex(c.xi(x0))
    y0 = complex(np.sqrt(c.f(x0)))
    pw = np.abs(xi0) ** np.arange(max(elem.a.size, elem.b.size))
    sa = float(np.dot(np.abs(elem.a), pw[: elem.a.size]))
    sb = float(np.dot(np.abs(elem.b), pw[: elem.b.size]))
    a0 = abs(P.polyval(xi0, elem.a))
    b0 = abs(P.polyval(xi0, elem.b))
    if a0 <= 1e-6 * max(sa, 1e-300) and b0 <= 1e-6 * max(sb, 1e-300):
        k = mult // 2
        res = [(x0, mult - k, c.point_with_y(x0, y0)), (x0, k, c.point_with_y(x0, -y0))]
        return [r for r in res if r[1] > 0]
    plus = sum(1 for y in ys if abs(y - y0) <= abs(y + y0))
    y = y0 if plus * 2 >= len(ys) else -y0
    return [(x0, mult, c.point_with_y(x0, y))]


def _newton_on_sheet(c, elem, x0, y0, iters=4):
    ap = P.polyder(elem.a) / c.radius
    bp = P.polyder(elem.b) / c.radius
    x, y = x0, y0
    for _ in range(iters):
        xi = complex(c.xi(x))
        fx = complex(c.f(x))
        s = complex(np.sqrt(fx))
        y = s if abs(s - y) <= abs(s + y) else -s
        h = P.polyval(xi, elem.a) + P.polyval(xi, elem.b) * y
        fp = complex(fx * np.sum(1.0 / (x - c.branch_points)))
        dh = P.polyval(xi, ap) + P.polyval(xi, bp) * y + P.polyval(xi, elem.b) * fp / (2 * y)
        if dh == 0:
            break
        step = h / dh
        x = x - step
        if abs(step) <= 1e-16 * max(1.0, abs(x)):
            break
    fx = complex(c.f(x))
    s = complex(np.sqrt(fx))
    y = s if abs(s - y) <= abs(s + y) else -s
    return complex(x), y


def zeros(obj, tol: Tolerances = DEFAULT_TOL, exclude=()) -> list:
    """Zeros with multiplicity, as a list of (CurvePoint, multiplicity).

    ``exclude`` lists zeros known in advance (point, multiplicity); they are
    divided out of the norm polynomial exactly and reported as given.
    """
    return divisor(obj, tol, exclude)[0]


def as_multiset(zs) -> list[CurvePoint]:
    out = []
    for p, m in zs:
        out.extend([p] * m)
    return out
