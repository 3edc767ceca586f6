import os
import subprocess
import sys

import numpy as np
import pytest

from bergman_lab import kernels
from bergman_lab.geometry import random_ball_points
from bergman_lab.holo import HoloFunc

BACKENDS = kernels.available_backends()


def test_pure_switch_selects_numpy():
    out = subprocess.run([sys.executable, "-c", "import bergman_lab; print(bergman_lab.BACKEND)"],
                         env={**os.environ, "BERGMAN_LAB_PURE": "1"}, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")
class TestBackendsAgree:
    def setup_method(self):
        self.rng = np.random.default_rng(0)
        self.py, self.cy = BACKENDS["numpy"], BACKENDS["cython"]

    def test_mobius_transport(self):
        c = random_ball_points(self.rng, 7, 2, 0.95)
        u = random_ball_points(self.rng, 50, 2, 0.95)
        assert np.allclose(self.py.mobius_transport(c, u), self.cy.mobius_transport(c, u), rtol=1e-13, atol=1e-15)

    def test_holo_eval(self):
        f = HoloFunc.kernel(np.array([0.6, 0.3j]), 3.5, s=2.0) + HoloFunc.monomial((2, 1), 1j)
        pts = random_ball_points(self.rng, 100, 2, 0.95)
        a = self.py.holo_eval(pts, *f._packed, True)
        b = self.cy.holo_eval(pts, *f._packed, True)
        for x, y in zip(a, b):
            assert np.allclose(x, y, rtol=1e-12)

    def test_projection_sum(self):
        zs = random_ball_points(self.rng, 40, 1, 0.99)
        ws = random_ball_points(self.rng, 60, 1, 0.9)
        cf = self.rng.normal(size=60) + 0j
        zeta = np.array([1.0 + 0j])
        assert np.allclose(self.py.projection_sum(zs, ws, cf, zeta, 2.5),
                           self.cy.projection_sum(zs, ws, cf, zeta, 2.5), rtol=1e-12)

    def test_greedy_separated(self):
        cands = random_ball_points(self.rng, 500, 1, 0.9)
        assert np.array_equal(self.py.greedy_separated(cands, 0.05), self.cy.greedy_separated(cands, 0.05))


def test_get_backend_unknown():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")
