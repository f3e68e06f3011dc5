import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from siderian.numerics import (QuadratureSpec, central_diff4, check_uniform, convolve_sin, forward_diff4,
                               quad_finite, quad_improper, quad_profile, root_bracketed, simpson_weights,
                               sym_eigen)


def test_simpson_exact_for_cubics():
    x = np.linspace(0.0, 2.0, 9)
    f = 3 * x**3 - x**2 + 5
    assert quad_profile(f, x[1] - x[0]) == pytest.approx(12 - 8 / 3 + 10, rel=1e-14)


def test_simpson_weight_pattern_and_errors():
    w = simpson_weights(5, 3.0)
    assert np.allclose(w, [1, 4, 2, 4, 1])
    with pytest.raises(ValueError):
        simpson_weights(4, 1.0)
    with pytest.raises(ValueError):
        quad_profile([1.0, np.nan, 1.0], 0.1)


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(atol=0.0)
    with pytest.raises(ValueError):
        QuadratureSpec(rule="gauss")


def test_improper_limits():
    assert quad_improper(2.0, 0.0) == 0.5
    assert quad_improper(0.0, 3.0) == pytest.approx(1.0 / 12.0)
    with pytest.raises(ValueError):
        quad_improper(0.0, 0.0)
    with pytest.raises(ValueError):
        quad_improper(-1.0, 1.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-6, 1e6), st.floats(1e-6, 1e6))
def test_improper_matches_reference(E, b):
    ref, _ = integrate.quad(lambda x: 1.0 / (E * x * x + b * x**5), 1.0, np.inf, epsabs=0, epsrel=1e-12, limit=500)
    assert quad_improper(E, b) == pytest.approx(ref, rel=1e-8)


def test_quad_finite():
    assert quad_finite(math.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-12)


def test_root_bracketed():
    assert root_bracketed(lambda x: x * x - 2, 0.0, 2.0) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert root_bracketed(lambda x: x - 1.0, 1.0, 3.0) == 1.0
    with pytest.raises(ValueError):
        root_bracketed(lambda x: x * x + 1, -1.0, 1.0)


def test_convolve_sin_matches_direct_trapezoid():
    rng = np.random.default_rng(1)
    G = rng.normal(size=60)
    dt, w = 0.05, 1.7
    fast = convolve_sin(G, w, dt)
    t = dt * np.arange(G.size)
    for k in (1, 17, 59):
        direct = np.trapezoid(np.sin(w * (t[k] - t[: k + 1])) * G[: k + 1], dx=dt)
        assert fast[k] == pytest.approx(direct, abs=1e-12)


def test_convolve_sin_constant_forcing():
    dt, w = 1e-3, 2.0
    t = dt * np.arange(2001)
    exact = (1 - np.cos(w * t)) / w
    assert np.max(np.abs(convolve_sin(np.ones_like(t), w, dt) - exact)) < 1e-6


def test_check_uniform():
    assert check_uniform(np.linspace(0, 1, 11)) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        check_uniform([0.0, 0.1, 0.3])
    with pytest.raises(ValueError):
        check_uniform([0.0])


def test_finite_differences_fourth_order():
    x = np.array([0.3, 1.1])
    for h in (1e-2,):
        assert np.allclose(central_diff4(np.sin, x, h), np.cos(x), atol=1e-9)
        assert np.allclose(forward_diff4(np.exp, x, h), np.exp(x), rtol=1e-7)


def test_sym_eigen_identity_and_diagonal():
    assert np.allclose(sym_eigen(np.eye(4)), 1.0)
    assert np.allclose(sym_eigen(np.diag([3.0, -1.0, 2.0])), [-1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        sym_eigen(np.array([[0.0, 1.0], [0.0, 0.0]]))


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 8), st.integers(0, 10_000))
def test_sym_eigen_matches_lapack(n, seed):
    a = np.random.default_rng(seed).normal(size=(n, n))
    a = a + a.T
    assert np.allclose(sym_eigen(a), np.linalg.eigvalsh(a), atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_sym_eigen_sum_is_trace(seed):
    a = np.random.default_rng(seed).normal(size=(6, 6))
    a = a + a.T
    assert sym_eigen(a).sum() == pytest.approx(np.trace(a), abs=1e-10)
