import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bergman_lab.geometry import (BergmanBall, CarlesonTube, bergman_ball_ellipsoid, bergman_ball_volume,
                                  bergman_metric, in_bergman_ball, in_tube, mobius, mobius_pairs,
                                  noniso_dist, norm2, phi_norm2, random_ball_points, unitary_completion)
from strategies import ball_points, sphere_points

dims = st.sampled_from([1, 2])


@given(st.data(), dims)
def test_mobius_involution_and_swap(data, n):
    a = data.draw(ball_points(n, 0.95))
    z = data.draw(ball_points(n, 0.95))
    assert np.allclose(mobius(a, mobius(a, z)), z, atol=1e-12)
    assert np.allclose(mobius(a, np.zeros(n)), a, atol=1e-15)
    assert np.all(mobius(a, a) == 0)


@given(st.data(), dims)
def test_fundamental_identity(data, n):
    a = data.draw(ball_points(n))
    z = data.draw(ball_points(n))
    lhs = 1 - norm2(mobius(a, z))
    rhs = (1 - norm2(a)) * (1 - norm2(z)) / abs(1 - np.vdot(a, z)) ** 2
    assert abs(lhs - rhs) < 1e-13
    assert abs(phi_norm2(a, z) - norm2(mobius(a, z))) < 1e-12


def test_mobius_at_zero_is_minus_identity(rng):
    z = random_ball_points(rng, 5, 2)
    assert np.allclose(mobius(np.zeros(2), z), -z)


def test_mobius_rejects_boundary_center():
    with pytest.raises(ValueError):
        mobius(np.array([1.0 + 0j]), np.array([0.1 + 0j]))


def test_mobius_pairs_matches_single(rng):
    A = random_ball_points(rng, 30, 2, 0.9)
    Z = random_ball_points(rng, 30, 2, 0.9)
    P = mobius_pairs(A, Z)
    for a, z, p in zip(A, Z, P):
        assert np.allclose(mobius(a, z), p, atol=1e-15)


@given(st.data(), dims)
def test_bergman_metric_is_invariant_and_symmetric(data, n):
    a = data.draw(ball_points(n, 0.9))
    z = data.draw(ball_points(n, 0.9))
    w = data.draw(ball_points(n, 0.9))
    d = bergman_metric(z, w)
    assert d >= 0
    assert abs(d - bergman_metric(w, z)) < 1e-9
    assert abs(d - bergman_metric(mobius(a, z), mobius(a, w))) < 1e-7 * max(1.0, d)


def test_bergman_metric_from_origin():
    z = np.array([0.5 + 0j, 0.0])
    assert math.isclose(bergman_metric(np.zeros(2), z), math.atanh(0.5), rel_tol=1e-14)
    with pytest.raises(ValueError):
        bergman_metric(np.zeros(1), np.ones(1))


@given(st.data(), dims, st.booleans())
def test_noniso_dist_triangle_inequality(data, n, on_sphere):
    draw = (lambda: data.draw(sphere_points(n))) if on_sphere else (lambda: data.draw(ball_points(n, 1.0)))
    z, u, w = draw(), draw(), draw()
    assert noniso_dist(z, w) <= noniso_dist(z, u) + noniso_dist(u, w) + 1e-12
    assert noniso_dist(z, w) <= math.sqrt(2) + 1e-12


def test_noniso_dist_triangle_inequality_dense(rng):
    for n in (1, 2):
        Z, U, W = (random_ball_points(rng, 20000, n) for _ in range(3))
        gap = noniso_dist(Z, U) + noniso_dist(U, W) - noniso_dist(Z, W)
        assert gap.min() >= -1e-12


def test_bergman_ball_volume_closed_form_at_origin():
    for n in (1, 2):
        assert math.isclose(bergman_ball_volume(np.zeros(n), 0.7), math.tanh(0.7) ** (2 * n), rel_tol=1e-14)


def test_ellipsoid_contains_exactly_the_bergman_ball(rng):
    a = np.array([0.6 + 0.2j, 0.1j])
    gamma = 0.8
    c, along, across = bergman_ball_ellipsoid(a, gamma)
    e1 = a / np.linalg.norm(a)
    pts = random_ball_points(rng, 4000, 2, 0.999)
    d = pts - c
    par = d @ np.conj(e1)
    perp = d - par[:, None] * e1
    q = np.abs(par) ** 2 / along ** 2 + norm2(perp) / across ** 2
    inside = in_bergman_ball(pts, BergmanBall(a, gamma))
    clear = np.abs(q - 1) > 1e-9
    assert np.array_equal(inside[clear], (q < 1)[clear])


def test_tube_membership_and_snapping():
    tube = CarlesonTube(np.array([1.0 + 0j]), 0.5)
    assert in_tube(np.array([0.9 + 0j]), tube)
    assert not in_tube(np.array([-0.9 + 0j]), tube)
    assert not in_tube(np.array([1.0 + 1e-15j]), tube)
    with pytest.raises(ValueError):
        CarlesonTube(np.array([0.5 + 0j]), 0.3)
    with pytest.raises(ValueError):
        BergmanBall(np.zeros(1), 0.0)


def test_unitary_completion(rng):
    zeta = rng.normal(size=2) + 1j * rng.normal(size=2)
    zeta /= np.linalg.norm(zeta)
    U = unitary_completion(zeta)
    assert np.allclose(U.conj().T @ U, np.eye(2), atol=1e-14)
    assert np.allclose(U[:, 0], zeta, atol=1e-14)
