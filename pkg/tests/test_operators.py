import math

import numpy as np
import pytest

from bergman_lab.geometry import CarlesonTube, random_ball_points
from bergman_lab.holo import HoloFunc
from bergman_lab.measures import QuadSpec, monomial_norm_exact
from bergman_lab.operators import (SpaceParams, area_values, bergman_norm, bloch_norm, bmo_tube_norm,
                                   equivalence_experiment, fubini_sides, generalized_norm, maximal_fn,
                                   maximal_fn_k, smallest_N, unitary_norms)
from bergman_lab.lattice import random_unitary

SPEC1 = QuadSpec(n=1, mode="product", radial_order=16, angular_order=24, inner_radial=6, inner_angular=12)


def test_space_params_validation():
    with pytest.raises(ValueError):
        SpaceParams(p=0)
    with pytest.raises(ValueError):
        SpaceParams(q=1.0)
    assert SpaceParams(p=1, alpha=-1.5).N == 1
    assert smallest_N(0.5, -2.0) == 3
    assert smallest_N(2.0, 0.0) == 0


def test_bergman_norm_of_monomial():
    f = HoloFunc.monomial((3,))
    est = bergman_norm(f, 2.0, 1.0, SPEC1)
    assert math.isclose(est.real, math.sqrt(monomial_norm_exact((3,), 1, 1.0)), rel_tol=1e-12)
    with pytest.raises(ValueError):
        bergman_norm(f, 2.0, -1.0, SPEC1)


def test_generalized_norm_with_negative_alpha():
    f = HoloFunc.monomial((2,)) + 1.0
    est = generalized_norm(f, 2.0, -1.5, SPEC1)
    assert "N=1" in est.notes
    assert est.real > 1.0


def test_unitary_invariance(rng):
    spec = QuadSpec(n=2, mode="product", radial_order=12, angular_order=16)
    f = HoloFunc.monomial((2, 1)) + HoloFunc.kernel(np.array([0.4, 0.2j]), 3.0, s=3.0)
    a, b = unitary_norms(f, random_unitary(rng, 2), SpaceParams(n=2, p=1.0), spec)
    assert math.isclose(a.real, b.real, rel_tol=1e-3)


def test_maximal_dominates_pointwise(rng):
    f = HoloFunc.kernel(np.array([0.8j]), 2.0, s=2.0) + HoloFunc.monomial((2,))
    for z in random_ball_points(rng, 10, 1, 0.9):
        assert maximal_fn(f, z, 0.5) >= abs(f(z[None])[0]) - 1e-14
        assert maximal_fn_k(f, z, 0.5, 0) == pytest.approx(maximal_fn(f, z, 0.5))


def test_maximal_of_identity_is_explicit():
    f = HoloFunc.monomial((1,))
    z = np.array([0.3 + 0j])
    R = math.tanh(0.4)
    exact = (0.3 + R) / (1 + 0.3 * R)
    assert math.isclose(maximal_fn(f, z, 0.4, boundary_samples=256), exact, rel_tol=1e-4)


def test_area_function_ordering(rng):
    f = HoloFunc.kernel(np.array([0.7]), 2.5, s=1.0) + HoloFunc.monomial((3,))
    Z = random_ball_points(rng, 20, 1, 0.95)
    A = area_values(f, Z, 0.5, 2.0, SPEC1)
    assert np.all(A["radial"] <= A["gradient"] + 1e-12)
    assert np.all(A["gradient"] <= A["invariant"] + 1e-12)


def test_bloch_norm_of_identity_and_constant():
    assert bloch_norm(HoloFunc.monomial((1,))) == pytest.approx(1.0, abs=1e-6)
    assert bloch_norm(HoloFunc.constant(2.0, 1)) == 0.0


def test_bmo_of_constant_is_zero():
    tubes = [CarlesonTube(np.array([1.0 + 0j]), r) for r in (1.0, 0.5)]
    assert bmo_tube_norm(HoloFunc.constant(3.0, 1), 0.0, 2.0, tubes, SPEC1) < 1e-12
    with pytest.raises(ValueError):
        bmo_tube_norm(HoloFunc.constant(3.0, 1), 0.0, 0.5, tubes, SPEC1)


def test_equivalence_experiment_lower_bound_and_skips():
    fam = [HoloFunc.monomial((2,)), HoloFunc.constant(1.0, 1),
           HoloFunc.kernel(np.array([0.9]), 2.0, s=2.0)]
    rep = equivalence_experiment(fam, "maximal", SpaceParams(p=1.0, gamma=0.3), SPEC1)
    assert rep.min >= 1 - 1e-6
    area = equivalence_experiment(fam, "area-radial", SpaceParams(p=1.0, gamma=0.3), SPEC1)
    assert len(area.rows) == 2 and area.skipped[0]["index"] == 1
    assert area.to_csv().splitlines()[0].startswith("op,index")
    with pytest.raises(ValueError):
        equivalence_experiment(fam, "nope", SpaceParams(), SPEC1)


def test_fubini_identity_on_a_monomial():
    f = HoloFunc.monomial((2,))
    spec = QuadSpec(n=1, mode="product", radial_order=20, angular_order=24, inner_radial=10, inner_angular=20)
    left, right = fubini_sides(f, SpaceParams(p=2, q=2, alpha=0.5, gamma=0.5), spec)
    assert math.isclose(left.real, right.real, rel_tol=1e-6)
