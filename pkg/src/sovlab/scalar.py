"""Scalar type used throughout the numerics.

Every array the library creates goes through :func:`asarray` / :func:`zeros`,
so switching to a wider complex type only touches this module.
"""
import numpy as np

DTYPE = np.complex128
EPS = float(np.finfo(np.float64).eps)

# name -> (dtype, available). numpy's LAPACK bindings reject long double,
# so the extended build is declared but not buildable here.
PRECISIONS = {
    "double": (np.complex128, True),
    "extended": (np.clongdouble, False),
}


def asarray(x) -> np.ndarray:
    return np.asarray(x, dtype=DTYPE)


def zeros(shape) -> np.ndarray:
    return np.zeros(shape, dtype=DTYPE)


def as_complex(z) -> complex:
    return complex(z)
