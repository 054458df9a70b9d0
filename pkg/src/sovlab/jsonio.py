"""JSON helpers: complex numbers as [re, im] pairs."""
from __future__ import annotations

import json
from numbers import Number

import numpy as np


def cjson(v):
    """Convert complex scalars/arrays (recursively) into [re, im] pairs."""
    if isinstance(v, np.ndarray):
        return [cjson(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [cjson(x) for x in v]
    if isinstance(v, dict):
        return {k: cjson(x) for k, x in v.items()}
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def from_pair(v) -> complex:
    if isinstance(v, Number):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(t, Number) for t in v):
        return complex(float(v[0]), float(v[1]))
    raise ValueError(f"expected [re, im], got {v!r}")


def dumps(obj) -> str:
    """Deterministic JSON text."""
    return json.dumps(cjson(obj), indent=2, sort_keys=True, allow_nan=True) + "\n"
