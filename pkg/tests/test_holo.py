import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bergman_lab.geometry import random_ball_points
from bergman_lab.holo import (HoloFunc, bergman_kernel, compose_unitary, fractional_shift, gradient,
                              invariant_gradient_fd, invariant_gradient_norm, multi_indices, project,
                              radial_derivative, radial_derivative_k)
from bergman_lab.lattice import random_unitary
from bergman_lab.measures import QuadSpec
from strategies import ball_points


def sample_func(n):
    a = np.array([0.5, 0.3j])[:n]
    return HoloFunc.monomial((2,) + (1,) * (n - 1), 0.5j) + HoloFunc.kernel(a, n + 1.5, s=1.0, c=-2) + 1.0


@pytest.mark.parametrize("n", [1, 2])
def test_evaluation_matches_formula(n, rng):
    f = sample_func(n)
    z = random_ball_points(rng, 10, n, 0.9)
    a = np.array([0.5, 0.3j])[:n]
    mono = 0.5j * z[:, 0] ** 2 * (z[:, 1] if n == 2 else 1)
    ker = -2 * (1 - np.sum(np.abs(a) ** 2)) / (1 - z @ np.conj(a)) ** (n + 1.5)
    assert np.allclose(f(z), mono + ker + 1.0, rtol=1e-13)


@pytest.mark.parametrize("n", [1, 2])
def test_radial_derivative_matches_directional_difference(n, rng):
    f = sample_func(n)
    z = random_ball_points(rng, 8, n, 0.8)
    h = 1e-6
    fd = (f(z * (1 + h)) - f(z * (1 - h))) / (2 * h)
    assert np.allclose(radial_derivative(f)(z), fd, rtol=1e-7, atol=1e-8)
    assert radial_derivative_k(f, 0) == f
    with pytest.raises(ValueError):
        radial_derivative_k(f, -1)


@given(ball_points(2, 0.9))
def test_invariant_gradient_closed_form_vs_finite_difference(z):
    f = sample_func(2)
    cf = invariant_gradient_norm(f, z)
    fd = invariant_gradient_fd(f, z)
    assert math.isclose(cf, fd, rel_tol=1e-6, abs_tol=1e-9)


@given(ball_points(2, 0.9))
def test_gradient_chain(z):
    f = sample_func(2)
    g = gradient(f, z)
    w = 1 - np.sum(np.abs(z) ** 2)
    rf = abs(np.sum(z * g))
    assert w * rf <= w * np.linalg.norm(g) + 1e-10
    assert w * np.linalg.norm(g) <= invariant_gradient_norm(f, z) + 1e-10


def test_invariant_gradient_of_identity_is_one_minus_norm():
    f = HoloFunc.monomial((1,))
    z = np.array([0.6 + 0j])
    assert math.isclose(invariant_gradient_norm(f, z), 1 - 0.36, rel_tol=1e-14)


def test_algebra_and_json_roundtrip():
    f = sample_func(2)
    g = f + f - f
    assert g == f
    assert HoloFunc.from_json(f.to_json()) == f
    assert (f - f).terms == ()
    with pytest.raises(TypeError):
        f * f
    with pytest.raises(ValueError):
        f + HoloFunc.constant(1, 1)
    with pytest.raises(AttributeError):
        f.n = 3


def test_kernel_at_origin_collapses_to_constant():
    f = HoloFunc.kernel(np.zeros(2), 3.0, c=2.0)
    assert f.is_polynomial and np.allclose(f(np.array([[0.3, 0.1j]])), 2.0)


def test_pole_guard():
    f = HoloFunc.kernel(np.array([1 - 1e-15]), 2.0)
    with pytest.raises(ValueError):
        f(np.array([[1.0 + 0j]]))
    assert np.isfinite(f(np.array([[0.99 + 0j]]))).all()


def test_compose_unitary(rng):
    f = sample_func(2)
    U = random_unitary(rng, 2)
    z = random_ball_points(rng, 6, 2, 0.9)
    assert np.allclose(compose_unitary(f, U)(z), f(z @ U.T), rtol=1e-12)


def test_fractional_shift_scales_homogeneous_parts():
    f = HoloFunc.monomial((2, 1)) + HoloFunc.monomial((0, 0), 3.0)
    g = fractional_shift(f, 0.5)
    z = np.array([[0.3, 0.2j]])
    assert np.allclose(g(z), math.sqrt(4) * 0.09 * 0.2j + 3.0)
    with pytest.raises(ValueError):
        fractional_shift(sample_func(1), 0.5)


@given(st.integers(1, 2), st.integers(0, 5))
def test_multi_indices_count(n, d):
    assert len(multi_indices(n, d)) == math.comb(n + d, d)


def test_projection_reproduces_polynomials():
    spec = QuadSpec(n=1, mode="product", radial_order=24, angular_order=32)
    f = HoloFunc.monomial((3,), 2.0) + 1.0
    z = np.array([0.4 + 0.3j])
    est = project(1.0, f, z, spec)
    assert abs(est.value - f(z[None])[0]) < 1e-8
    with pytest.raises(ValueError):
        bergman_kernel(-1.0, z, z)
