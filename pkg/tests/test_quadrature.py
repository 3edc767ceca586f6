import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bergman_lab import quadrature as qd
from bergman_lab.geometry import BergmanBall, CarlesonTube, norm2
from bergman_lab.measures import (Estimate, QuadSpec, WeightedMeasure, bergman_ball_volume_alpha,
                                  bergman_ball_volume_alpha_series, c_alpha, integrate_ball,
                                  integrate_bergman_ball, kernel_power_integral_exact, loglog_slope,
                                  monomial_norm_exact, tau_ball_volume, tube_volume)


@given(st.integers(1, 12), st.floats(-0.9, 3.0), st.floats(-0.9, 3.0))
def test_gauss_jacobi_integrates_polynomials(order, a, b):
    t, w = qd.gauss_jacobi01(order, a, b)
    for k in range(2 * order):
        exact = math.exp(math.lgamma(a + 1) + math.lgamma(b + k + 1) - math.lgamma(a + b + k + 2))
        assert math.isclose(float(np.sum(w * t ** k)), exact, rel_tol=1e-9)


def test_gauss_jacobi_rejects_bad_exponents():
    with pytest.raises(ValueError):
        qd.gauss_jacobi01(4, -1.0, 0.0)


@pytest.mark.parametrize("n", [1, 2])
def test_sphere_rule_is_probability(n):
    nodes, w = qd.sphere_rule(n, 16)
    assert math.isclose(w.sum(), 1.0, rel_tol=1e-14)
    assert np.allclose(norm2(nodes), 1.0)


@pytest.mark.parametrize("n,alpha", [(1, 0.0), (1, 2.5), (2, 1.0)])
def test_product_rule_matches_monomial_norms(n, alpha):
    spec = QuadSpec(n=n, mode="product", radial_order=12, angular_order=16)
    for J in [(0,) * n, (3,) + (0,) * (n - 1), (1,) * n, (2,) * n]:
        est = integrate_ball(lambda z, J=J: np.abs(np.prod(z ** np.array(J), axis=1)) ** 2,
                             WeightedMeasure("v_alpha", alpha), spec)
        assert math.isclose(est.real, monomial_norm_exact(J, n, alpha), rel_tol=1e-12)
        assert est.stderr == 0


def test_monte_carlo_within_error_bars():
    spec = QuadSpec(n=2, mode="monte-carlo", sample_count=20000, seed=3)
    J = (2, 1)
    est = integrate_ball(lambda z: np.abs(z[:, 0] ** 2 * z[:, 1]) ** 2, WeightedMeasure("v_alpha", 1.0), spec)
    assert est.stderr > 0
    assert est.agrees_with(monomial_norm_exact(J, 2, 1.0), k=4)


def test_monte_carlo_is_seed_deterministic():
    spec = QuadSpec(n=2, mode="monte-carlo", sample_count=2000, seed=9)
    f = lambda z: norm2(z)  # noqa: E731
    a = integrate_ball(f, WeightedMeasure(), spec)
    b = integrate_ball(f, WeightedMeasure(), spec)
    assert a.value == b.value and a.stderr == b.stderr


def test_c_alpha_and_rejections():
    assert math.isclose(c_alpha(1, 0.0), 1.0)
    assert math.isclose(c_alpha(2, 1.0), math.gamma(4) / (2 * math.gamma(2)))
    with pytest.raises(ValueError):
        c_alpha(1, -1.0)
    with pytest.raises(ValueError):
        WeightedMeasure("v_alpha", -1.5)
    with pytest.raises(ValueError):
        QuadSpec(mode="bogus")
    with pytest.raises(ValueError):
        Estimate(1.0, -1.0)


@pytest.mark.parametrize("n,alpha,lam", [(1, 0.0, 1.2), (2, 1.0, 2.0)])
def test_kernel_power_series_matches_adapted_quadrature(n, alpha, lam):
    z = np.zeros(n, dtype=complex)
    z[0] = 0.7
    spec = QuadSpec(n=n, mode="product", radial_order=40, angular_order=64)
    est = integrate_ball(lambda w: np.abs(1 - w @ np.conj(z)) ** (-2 * lam), WeightedMeasure("v_alpha", alpha),
                         spec, centers=[z])
    assert math.isclose(est.real, kernel_power_integral_exact(0.7, lam, n, alpha), rel_tol=1e-6)


@pytest.mark.parametrize("n", [1, 2])
def test_bergman_ball_volumes(n):
    spec = QuadSpec(n=n, mode="product", radial_order=24, angular_order=24)
    z = np.zeros(n, dtype=complex)
    z[0] = 0.6j
    closed = (math.tanh(0.5) ** (2 * n) * (1 - 0.36) ** (n + 1) / (1 - math.tanh(0.5) ** 2 * 0.36) ** (n + 1))
    assert math.isclose(bergman_ball_volume_alpha(z, 0.5, 0.0, spec).real, closed, rel_tol=1e-9)
    assert math.isclose(bergman_ball_volume_alpha_series(z, 0.5, 0.0), closed, rel_tol=1e-12)
    assert math.isclose(bergman_ball_volume_alpha_series(z, 0.5, 1.5),
                        bergman_ball_volume_alpha(z, 0.5, 1.5, spec).real, rel_tol=1e-8)


def test_tau_volume_of_bergman_balls_is_center_free():
    spec = QuadSpec(n=2, mode="product", radial_order=16, angular_order=16)
    for c in ([0, 0], [0.5, 0.3j], [0.0, -0.95]):
        est = integrate_bergman_ball(lambda w: np.ones(len(w)), BergmanBall(np.array(c, complex), 0.6), spec)
        assert math.isclose(est.real, tau_ball_volume(2, 0.6), rel_tol=1e-10)


def test_tau_integral_of_nonintegrable_data_is_flagged():
    spec = QuadSpec(n=1, mode="product")
    est = integrate_ball(lambda w: np.ones(len(w)), WeightedMeasure("tau"), spec)
    assert est.divergent
    with pytest.raises(ValueError):
        integrate_ball(lambda w: 1.0, WeightedMeasure("tau"), spec, integrable=False)
    ok = integrate_ball(lambda w: (1 - norm2(w)) ** 3, WeightedMeasure("tau"), spec)
    assert not ok.divergent and math.isclose(ok.real, 0.5, rel_tol=1e-8)


def test_tube_volume_scaling():
    spec = QuadSpec(n=1, mode="product")
    ap = np.array([1.0 + 0j])
    radii = np.array([2.0 ** -k for k in range(2, 6)])
    vols = [tube_volume(CarlesonTube(ap, r), 0.0, spec).real for r in radii]
    slope = loglog_slope(radii, np.array(vols))[0]
    assert abs(slope - 4.0) < 0.2
    assert tube_volume(CarlesonTube(ap, 1.5), 0.0, spec).real == 1.0


def test_loglog_slope_exact_power():
    x = np.array([0.1, 0.2, 0.4])
    assert math.isclose(loglog_slope(x, 3 * x ** 2.5)[0], 2.5, rel_tol=1e-12)
