import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bergman_lab.atoms import (CarlesonMeasureSpec, admissible_triples, atom_is_valid, atom_projection_norm,
                               carleson_check, carleson_integral_exact, cr_atom, cr_near_critical,
                               cr_synthesize, cr_threshold, kernel_diff_explicit_constant, kernel_diff_ratio,
                               kernel_integral, make_tube_atom, unit_atom)
from bergman_lab.geometry import CarlesonTube
from bergman_lab.holo import HoloFunc
from bergman_lab.measures import QuadSpec
from bergman_lab.operators import bergman_norm

SPEC1 = QuadSpec(n=1, mode="product", radial_order=24, angular_order=48)
E1 = np.array([1.0 + 0j])


def test_cr_threshold_and_rejection():
    assert cr_threshold(2, 0.5, 1.0) == 4 + 4
    with pytest.raises(ValueError, match="must exceed"):
        cr_atom(np.array([0.5]), 2.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        cr_atom(np.array([1.0]), 5.0, 1.0, 0.0)
    assert cr_near_critical(1, 2.5, 1.0, 0.0)
    assert not cr_near_critical(1, 4.0, 1.0, 0.0)


def test_cr_atom_at_origin_is_one():
    f = cr_atom(np.zeros(1), 3.0, 1.0, 0.0)
    assert np.allclose(f(np.array([[0.3 + 0.2j]])), 1.0)


@given(st.floats(0.0, 0.99), st.sampled_from([0.5, 1.0]))
def test_cr_atom_norm_is_uniformly_bounded(r, p):
    b = cr_threshold(1, p, 0.0) + 1.0
    f = cr_atom(np.array([r * np.exp(0.4j)]), b, p, 0.0)
    assert bergman_norm(f, p, 0.0, SPEC1).real < 5.0


def test_cr_synthesize():
    atoms = [cr_atom(np.array([0.5]), 3.0, 1.0, 0.0), cr_atom(np.array([-0.5j]), 3.0, 1.0, 0.0)]
    f = cr_synthesize([2.0, -1j], atoms)
    z = np.array([[0.1 + 0.1j]])
    assert np.allclose(f(z), 2 * atoms[0](z) - 1j * atoms[1](z))
    assert cr_synthesize([], [], n=2) == HoloFunc.zero(2)
    with pytest.raises(ValueError):
        cr_synthesize([1.0], [])


def test_tube_atom_is_valid_and_doubling_breaks_it():
    tube = CarlesonTube(E1, 0.5)
    atom = make_tube_atom(tube, lambda z: z[:, 0].real, 2.0, 0.0, SPEC1)
    diag = atom_is_valid(atom, SPEC1)
    assert diag and diag.support and abs(diag.norm_ratio - 1) < 1e-10
    assert not atom_is_valid(atom.scaled(2.0), SPEC1)
    assert atom(np.array([[-0.5 + 0j]]))[0] == 0


def test_constant_profile_is_rejected():
    with pytest.raises(ValueError, match="constant"):
        make_tube_atom(CarlesonTube(E1, 0.5), lambda z: np.ones(len(z)), 2.0, 0.0, SPEC1)


@pytest.mark.parametrize("n", [1, 2])
def test_unit_atom_projection_is_one(n):
    spec = QuadSpec(n=n, mode="product", radial_order=24, angular_order=32)
    est = atom_projection_norm(unit_atom(n), 0.0, spec)
    assert abs(est.real - 1.0) < 1e-8


def test_kernel_difference_regime_and_zero():
    zeta = E1
    z = np.array([0.2 + 0j])
    assert kernel_diff_ratio(z, zeta, zeta, 0.0) == 0.0
    with pytest.raises(ValueError, match="regime"):
        kernel_diff_ratio(np.array([0.99 + 0j]), np.array([0.5 + 0j]), zeta, 0.0)
    with pytest.raises(ValueError):
        kernel_diff_ratio(z, z, np.array([0.5 + 0j]), 0.0)


@pytest.mark.parametrize("n", [1, 2])
def test_kernel_difference_below_explicit_constant(n):
    rng = np.random.default_rng(n)
    Z, W, Zeta = admissible_triples(rng, 300, n, 5.0)
    worst = max(kernel_diff_ratio(z, w, t, 0.5, 5.0) for z, w, t in zip(Z, W, Zeta))
    assert worst <= kernel_diff_explicit_constant(n, 0.5, 5.0)


def test_kernel_integral_matches_series():
    mu = CarlesonMeasureSpec("v_alpha", alpha=0.5)
    z = np.array([0.8j])
    got = kernel_integral(mu, z, 0.5, 1.0, SPEC1.with_(radial_order=40, angular_order=64))
    assert math.isclose(got, carleson_integral_exact(0.5, 0.8, 0.5, 1.0, 1), rel_tol=1e-6)


def test_carleson_sides_agree():
    radii = [2.0 ** -k for k in range(2, 6)]
    probes = np.array([[1 - 10.0 ** -k + 0j] for k in np.arange(0.5, 4.01, 0.5)])
    fin = carleson_check(CarlesonMeasureSpec("v_alpha", alpha=1.0), 1.0, 1.0, radii, probes, SPEC1)
    assert not fin["tube_divergent"] and not fin["integral_divergent"] and fin["consistent"]
    div = carleson_check(CarlesonMeasureSpec("v_alpha", alpha=0.0), 1.0, 1.0, radii, probes, SPEC1)
    assert div["tube_divergent"] and div["integral_divergent"] and div["consistent"]
    pts = carleson_check(CarlesonMeasureSpec("points", points=((0j,),), masses=(1.0,)), 1.0, 1.0,
                         radii, probes, SPEC1)
    assert pts["consistent"] and not pts["integral_divergent"]
    with pytest.raises(ValueError):
        CarlesonMeasureSpec("points", masses=(-1.0,))
