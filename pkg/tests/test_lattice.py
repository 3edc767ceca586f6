import math

import numpy as np
import pytest

from bergman_lab.geometry import bergman_metric
from bergman_lab.lattice import (Lattice, build_lattice, covering_defect, min_separation, overlap_count,
                                 probe_points, random_unitary, rotate)


@pytest.fixture(scope="module")
def lat1():
    return build_lattice(1, 0.6, 0.9)


def test_separation_and_cover(lat1):
    assert lat1.separation >= 0.5 * lat1.gamma - 1e-12
    assert lat1.covered
    assert lat1.overlap_bound >= 1
    probes = probe_points(np.random.default_rng(7), 500, 1, 0.9)
    assert covering_defect(lat1, probes) == 0.0


def test_overlap_bound_holds_at_fresh_points(lat1, rng):
    probes = probe_points(rng, 200, 1, 0.9)
    counts = [overlap_count(lat1, z) for z in probes]
    assert max(counts) <= lat1.overlap_bound


def test_min_separation_brute_force(lat1):
    P = lat1.points[:40]
    brute = min(bergman_metric(P[i], P[j]) for i in range(len(P)) for j in range(i))
    assert math.isclose(min_separation(P), float(brute), rel_tol=1e-9)
    assert min_separation(P[:1]) == math.inf


def test_two_dimensional_lattice_is_deterministic():
    a = build_lattice(2, 1.0, 0.7)
    b = build_lattice(2, 1.0, 0.7)
    assert np.array_equal(a.points, b.points)
    assert a.covered and a.separation >= 0.5 - 1e-12


def test_rotation_and_json(lat1, rng):
    U = random_unitary(rng, 1)
    r = rotate(lat1, U)
    assert math.isclose(min_separation(r.points), lat1.separation, rel_tol=1e-9)
    back = Lattice.from_json(lat1.to_json())
    assert np.array_equal(back.points, lat1.points) and back.gamma == lat1.gamma


def test_rejections():
    with pytest.raises(ValueError):
        build_lattice(1, 0.0, 0.5)
    with pytest.raises(ValueError):
        build_lattice(1, 0.5, 1.0)
    with pytest.raises(ValueError):
        build_lattice(1, 0.5, 0.5, sep_factor=1.0)
