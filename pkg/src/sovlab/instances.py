"""The default genus-3 instance used by tests, scripts and the CLI."""
from __future__ import annotations

import numpy as np

from .curve import HyperellipticCurve
from .lambda_conn import ModuliChart

DEFAULT_Q = [(0.5 + 0.7j, 1), (2.5 - 0.8j, 1), (4.6 + 0.9j, -1)]
DEFAULT_QCHECK = [(-0.8 + 1.1j, 1), (1.4 + 1.6j, -1), (3.4 - 1.4j, 1), (6.8 + 0.6j, -1)]
DEFAULT_P = [(1.1 - 1.9j, 1), (2.9 + 1.8j, -1), (5.3 - 1.1j, 1), (7.4 - 0.9j, 1)]


def default_chart(lam: complex = 1.0, d: int = -1) -> ModuliChart:
    c = HyperellipticCurve.default()
    mk = lambda lst: tuple(c.point(x, s) for x, s in lst)
    return ModuliChart(c, d, complex(lam), mk(DEFAULT_Q), mk(DEFAULT_QCHECK), mk(DEFAULT_P))
