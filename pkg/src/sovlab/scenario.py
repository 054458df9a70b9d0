"""Scenario files: curve, chart, Darboux point and options in JSON syntax.

Complex numbers are ``[re, im]`` pairs.  Points are ``{"x": [re, im], "sheet": 1}``.
``darboux.k`` may be an array, ``"project"`` (seeded random fill, then rescaled
onto H = lam d) or ``["project", [...]]`` (given values, rescaled).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from numbers import Number

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .curve import HyperellipticCurve
from .errors import ParseError, PreconditionError
from .lambda_conn import DarbouxPoint, ModuliChart, moment, project_to_level, validate_chart


def rng_from_seed(seed: int, stream: int = 0) -> np.random.Generator:
    """The only RNG constructor used by the package (counter-based Philox).

    ``stream`` selects an independent sub-stream via Philox jumps.
    """
    bg = np.random.Philox(int(seed))
    if stream:
        bg = bg.jumped(int(stream))
    return np.random.Generator(bg)


@dataclass
class Scenario:
    chart: ModuliChart
    point: DarbouxPoint
    seed: int
    raw: dict
    projected: bool = False
    records: object = None          # for the oper command
    deltaq: list = field(default_factory=list)


def _cx(v, path) -> complex:
    if isinstance(v, bool):
        raise ParseError(f"{path}: expected [re, im], got a boolean")
    if isinstance(v, Number):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(t, Number) and not isinstance(t, bool) for t in v):
        return complex(float(v[0]), float(v[1]))
    raise ParseError(f"{path}: expected [re, im], got {v!r}")


def _cx_list(v, path) -> np.ndarray:
    if not isinstance(v, list):
        raise ParseError(f"{path}: expected a list of [re, im] pairs")
    return np.array([_cx(t, f"{path}[{i}]") for i, t in enumerate(v)], dtype=complex)


def _point(curve, v, path):
    if not isinstance(v, dict) or "x" not in v:
        raise ParseError(f"{path}: expected {{'x': [re, im], 'sheet': +-1}}")
    x = _cx(v["x"], f"{path}.x")
    sheet = v.get("sheet", 1)
    if sheet not in (1, -1):
        raise ParseError(f"{path}.sheet: must be +1 or -1")
    try:
        return curve.point(x, sheet)
    except PreconditionError as e:
        raise PreconditionError(f"{path}: {e}") from e


def _require(d, key, path):
    if key not in d:
        raise ParseError(f"{path}: missing field '{key}'")
    return d[key]


def loads(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"line {e.lineno}, column {e.colno}: {e.msg}") from e


def parse(raw: dict, tol_overrides: dict | None = None, truncation: int | None = None) -> Scenario:
    if not isinstance(raw, dict):
        raise ParseError("top level: expected an object")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ParseError("seed: expected an unsigned integer")
    tv = raw.get("tolerances", {}) or {}
    if not isinstance(tv, dict):
        raise ParseError("tolerances: expected an object")
    known = set(Tolerances.__dataclass_fields__)
    bad = set(tv) - known
    if bad:
        raise ParseError(f"tolerances: unknown keys {sorted(bad)}")
    tv = dict(tv)
    tv.update({k: v for k, v in (tol_overrides or {}).items() if v is not None})
    trunc = truncation if truncation is not None else raw.get("truncation_order")
    if trunc is not None:
        if not isinstance(trunc, int) or trunc < 2:
            raise ParseError("truncation_order: expected an integer >= 2")
        tv["truncation"] = trunc
    tol = DEFAULT_TOL.updated(**tv)
    fc = _cx_list(_require(raw, "curve", "top level"), "curve")
    curve = HyperellipticCurve(fc, tol=tol)
    d = _require(raw, "d", "top level")
    if not isinstance(d, int) or isinstance(d, bool):
        raise ParseError("d: expected an integer")
    lam = _cx(_require(raw, "lambda", "top level"), "lambda")
    pts = {}
    for key in ("q", "qcheck", "p"):
        lst = _require(raw, key, "top level")
        if not isinstance(lst, list):
            raise ParseError(f"{key}: expected a list of points")
        pts[key] = tuple(_point(curve, v, f"{key}[{i}]") for i, v in enumerate(lst))
    mc = ModuliChart(curve, d, lam, pts["q"], pts["qcheck"], pts["p"], tol)
    validate_chart(mc)
    rng = rng_from_seed(seed)
    dar = raw.get("darboux", {}) or {}
    if not isinstance(dar, dict):
        raise ParseError("darboux: expected an object")

    def fill(key, n):
        if key in dar and not (isinstance(dar[key], str) or (isinstance(dar[key], list) and dar[key][:1] == ["project"])):
            v = _cx_list(dar[key], f"darboux.{key}")
            if v.size != n:
                raise ParseError(f"darboux.{key}: expected {n} entries, got {v.size}")
            return v
        return rng.standard_normal(n) + 1j * rng.standard_normal(n)

    x = fill("x", mc.N)
    zc = fill("zcheck", mc.g)
    z = _cx_list(dar["z"], "darboux.z") if "z" in dar else np.zeros(mc.g, dtype=complex)
    if z.size != mc.g:
        raise ParseError(f"darboux.z: expected {mc.g} entries")
    kk = dar.get("k", "project")
    project = False
    if isinstance(kk, str):
        if kk != "project":
            raise ParseError("darboux.k: the only token allowed is 'project'")
        k = rng.standard_normal(mc.N) + 1j * rng.standard_normal(mc.N)
        project = True
    elif isinstance(kk, list) and kk[:1] == ["project"]:
        if len(kk) != 2:
            raise ParseError("darboux.k: expected ['project', [...]]")
        k = _cx_list(kk[1], "darboux.k[1]")
        project = True
    else:
        k = _cx_list(kk, "darboux.k")
    if k.size != mc.N:
        raise ParseError(f"darboux.k: expected {mc.N} entries, got {k.size}")
    pt = DarbouxPoint.make(x, z, k, zc)
    if project:
        pt = project_to_level(mc, pt)
    sc = Scenario(mc, pt, seed, raw, project)
    sc.records = raw.get("records")
    sc.deltaq = raw.get("deltaq_choices", [])
    return sc


def load(path: str | None, **kw) -> Scenario:
    if path is None:
        text = resources.files("sovlab").joinpath("data/default_scenario.json").read_text(encoding="utf-8")
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise ParseError(f"cannot read scenario {path}: {e}") from e
    return parse(loads(text), **kw)


def default_raw(seed: int = 0, lam=1.0) -> dict:
    """The bundled default scenario as a dict (genus 3, d = -1)."""
    from .instances import DEFAULT_P, DEFAULT_Q, DEFAULT_QCHECK
    from .jsonio import cjson

    curve = HyperellipticCurve.default()
    pts = lambda lst: [{"x": cjson(complex(x)), "sheet": s} for x, s in lst]
    rng = rng_from_seed(seed)
    x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    k = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    zc = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    return {
        "curve": cjson(curve.f_coeffs.astype(complex).round(12)),
        "d": -1,
        "lambda": cjson(complex(lam)),
        "q": pts(DEFAULT_Q),
        "qcheck": pts(DEFAULT_QCHECK),
        "p": pts(DEFAULT_P),
        "darboux": {"x": cjson(x), "k": ["project", cjson(k)], "zcheck": cjson(zc)},
        "seed": seed,
    }
