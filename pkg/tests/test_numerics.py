import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nfbeam.numerics import SERIES_CUTOFF, fresnel, inner_product, is_unit_norm
from oracles import quad_fresnel

finite = st.floats(min_value=-60, max_value=60, allow_nan=False)


def test_zero():
    assert fresnel(0.0) == (0.0, 0.0)


def test_value_at_one():
    c, s = fresnel(1.0)
    assert c == pytest.approx(0.7798934, abs=1e-7)
    assert s == pytest.approx(0.4382591, abs=1e-7)


@pytest.mark.parametrize("x", [0.05, 0.5, 1.0, 1.79, 1.8, 1.81, 2.5, 3.7, 6.0, 11.3, 25.0])
def test_matches_quadrature(x):
    c, s = fresnel(x)
    qc, qs = quad_fresnel(x)
    assert abs(c - qc) < 1e-10
    assert abs(s - qs) < 1e-10


def test_continuous_across_series_cutoff():
    eps = 1e-9
    lo = fresnel(SERIES_CUTOFF - eps)
    hi = fresnel(SERIES_CUTOFF + eps)
    assert abs(lo.c - hi.c) < 1e-8
    assert abs(lo.s - hi.s) < 1e-8


def test_asymptote():
    c, s = fresnel(50.0)
    assert abs(c - 0.5) < 0.01 and abs(s - 0.5) < 0.01


def test_array_input_matches_scalar():
    xs = np.linspace(-4, 4, 41)
    c, s = fresnel(xs)
    assert c.shape == xs.shape
    for x, ci, si in zip(xs, c, s):
        pair = fresnel(float(x))
        assert ci == pytest.approx(pair.c, abs=1e-15) and si == pytest.approx(pair.s, abs=1e-15)


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_rejects_non_finite(bad):
    with pytest.raises(ValueError):
        fresnel(bad)


@given(finite)
def test_odd_symmetry_exact(x):
    p, m = fresnel(x), fresnel(-x)
    assert p.c == -m.c and p.s == -m.s


@given(finite)
def test_bounded(x):
    c, s = fresnel(x)
    assert abs(c) < 0.9 and abs(s) < 0.9
    # the Cornu spiral's largest radius (about x = 1.21) is sqrt(0.9007)
    assert c * c + s * s <= 0.901


def test_squared_radius_peak_matches_quadrature():
    xs = np.linspace(0, 4, 4001)
    c, s = fresnel(xs)
    k = int(np.argmax(c * c + s * s))
    qc, qs = quad_fresnel(xs[k])
    assert qc * qc + qs * qs == pytest.approx(0.9007, abs=1e-4)
    assert 1.15 < xs[k] < 1.25


def test_monotone_on_unit_interval():
    c, s = fresnel(np.linspace(0, 1, 501))
    assert np.all(np.diff(c) > 0) and np.all(np.diff(s) > 0)


def test_inner_product_basis():
    e0 = np.zeros(8, complex)
    e0[0] = 1
    assert inner_product(e0, e0) == 1


@given(st.integers(0, 2**32 - 1))
def test_inner_product_hermitian_and_cauchy_schwarz(seed):
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    v = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    assert inner_product(u, v) == pytest.approx(np.conj(inner_product(v, u)))
    assert abs(inner_product(u, v)) <= math.sqrt(inner_product(u, u).real * inner_product(v, v).real) + 1e-12
    uu = inner_product(u, u)
    assert uu.imag == 0 and uu.real >= 0


def test_inner_product_conjugates_first_argument():
    assert inner_product(np.array([1j]), np.array([1.0])) == -1j


def test_inner_product_length_mismatch():
    with pytest.raises(ValueError):
        inner_product(np.ones(3), np.ones(4))


def test_is_unit_norm():
    assert is_unit_norm(np.ones(4) / 2)
    assert not is_unit_norm(np.ones(4))
