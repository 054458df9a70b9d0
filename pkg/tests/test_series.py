import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sovlab.errors import AnchorMismatch, SeriesError, TruncationError
from sovlab.series import LocalSeries

N = 10

cfloat = st.floats(min_value=-2, max_value=2, allow_nan=False, allow_infinity=False)
ccomplex = st.builds(complex, cfloat, cfloat)


@st.composite
def unit_series(draw, n=N):
    """Series with a leading coefficient of modulus >= 1/2."""
    c = draw(st.lists(ccomplex, min_size=n, max_size=n))
    lead = draw(st.builds(lambda r, th: r * np.exp(1j * th),
                          st.floats(0.5, 2.0), st.floats(0, 2 * np.pi)))
    c[0] = lead
    return LocalSeries(np.array(c), 0)


def close(a: LocalSeries, b: LocalSeries, tol=1e-10, upto=None):
    k1 = min(a.prec, b.prec) if upto is None else upto
    k0 = min(a.val, b.val)
    x, y = a.window(k0, k1), b.window(k0, k1)
    return float(np.max(np.abs(x - y) / np.maximum(1.0, np.abs(y)))) <= tol


def test_geometric_inverse():
    t = LocalSeries.variable(N)
    inv = (1 - t).inverse()
    np.testing.assert_allclose(inv.window(0, N), np.ones(N))


def test_laurent_bookkeeping():
    s = LocalSeries([1.0, 2.0, 3.0], -2)
    assert s.val == -2 and s.prec == 1
    assert s.coeff(-3) == 0 and s.coeff(0) == 3
    with pytest.raises(TruncationError):
        s.coeff(1)
    assert (s * LocalSeries.monomial(2, 3)).val == 0


def test_anchor_mismatch():
    a = LocalSeries([1.0, 1.0], 0, anchor="p")
    b = LocalSeries([1.0, 1.0], 0, anchor="q")
    with pytest.raises(AnchorMismatch):
        a + b


def test_zero_series_division():
    with pytest.raises(SeriesError):
        LocalSeries(np.ones(3)) / LocalSeries(np.zeros(3))


@given(unit_series(), unit_series())
@settings(max_examples=40, deadline=None)
def test_mul_div_roundtrip(a, b):
    assert close((a * b) / b, a, 1e-9)


@given(unit_series(), unit_series())
@settings(max_examples=40, deadline=None)
def test_leibniz(a, b):
    lhs = (a * b).deriv()
    rhs = a.deriv() * b + a * b.deriv()
    assert close(lhs, rhs, 1e-10)


@given(unit_series())
@settings(max_examples=40, deadline=None)
def test_sqrt_squares_back(a):
    r = a.sqrt()
    assert close(r * r, a, 1e-9)


@given(unit_series())
@settings(max_examples=40, deadline=None)
def test_reversion_is_compositional_inverse(a):
    t = LocalSeries.variable(N)
    g = t * a.coeff(0) + (a - a.coeff(0)).shift(1).truncate(N)   # g(0) = 0, g'(0) = lead
    r = g.reversion()
    ident = g.compose(r)
    # weigh coefficient k by rho^k, rho the natural radius of the reversion
    k = np.arange(1, N)
    mags = np.abs(r.window(1, N))
    rho = min(1.0, float(np.min((1.0 / np.maximum(mags, 1e-300)) ** (1.0 / k))))
    err = np.abs(ident.window(1, N) - t.window(1, N)) * rho ** k
    assert err.max() < 1e-12


@pytest.mark.parametrize("alpha", [0.5, -1.0, 1.5, 3.0])
def test_power_matches_repeated_products(alpha):
    t = LocalSeries.variable(N)
    s = 1 + 0.3 * t - 0.2j * t * t
    p = s.power(alpha)
    if float(alpha).is_integer():
        ref = s ** int(alpha) if alpha > 0 else s.inverse()
    else:
        ref = s.sqrt() ** int(2 * alpha)
    assert close(p, ref, 1e-12)


def test_evaluate_polynomial():
    s = LocalSeries.from_poly_coeffs([1.0, 2.0, 3.0], 5)
    assert abs(s.evaluate(0.1) - (1 + 0.2 + 0.03)) < 1e-14
