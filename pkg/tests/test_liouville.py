import math

import numpy as np
import pytest

from ergolab import (
    VectorField,
    det_comparison_batch,
    det_comparison_profile,
    flow_det_liouville,
    flow_det_variational,
)
from ergolab.systems import damped_oscillator_field, harmonic_field, pendulum_field


def test_time_zero_determinant_is_one():
    field = harmonic_field()
    assert flow_det_variational(field, [1.0, 0.0], 0.0, 1e-2) == 1.0
    assert flow_det_liouville(field, [1.0, 0.0], 0.0, 1e-2) == 1.0


def test_divergence_free_flows_preserve_volume():
    for field in (harmonic_field(1, 1), pendulum_field(1)):
        det_v = flow_det_variational(field, [0.7, -0.4], 5.0, 1e-3)
        det_l = flow_det_liouville(field, [0.7, -0.4], 5.0, 1e-3)
        assert abs(det_v - 1.0) <= 1e-6
        assert abs(det_l - 1.0) <= 1e-6


def test_damped_oscillator_matches_exponential_decay():
    # constant divergence -gamma: det D phi^t = e^{-gamma t} exactly
    field = damped_oscillator_field(0.5)
    assert abs(flow_det_variational(field, [1.0, 0.0], 2.0, 1e-3) - math.exp(-1.0)) <= 1e-6
    assert abs(flow_det_liouville(field, [1.0, 0.0], 2.0, 1e-3) - math.exp(-1.0)) <= 1e-8


def test_routes_agree_on_damped_oscillator():
    for gamma in (0.1, 0.5):
        field = damped_oscillator_field(gamma)
        for comparison in det_comparison_profile(field, [0.3, 1.1], [1.0, 2.0, 5.0], 1e-3):
            assert abs(comparison.det_variational - comparison.det_liouville) <= 1e-4
            assert comparison.det_variational > 0 and comparison.det_liouville > 0


def test_nonconstant_divergence_against_closed_form():
    # x' = x^2 flows to x/(1 - t x); D phi^t = 1/(1 - t x)^2 and the divergence
    # integral of 2 phi^s(x) reproduces it, so both routes have an exact oracle
    field = VectorField(dim=1, eval=lambda x: x**2)
    x0, t = 0.3, 1.0
    oracle = 1.0 / (1.0 - t * x0) ** 2
    assert flow_det_variational(field, [x0], t, 1e-3) == pytest.approx(oracle, abs=1e-8)
    assert flow_det_liouville(field, [x0], t, 1e-3) == pytest.approx(oracle, abs=1e-8)


def test_trapezoid_fallback_for_odd_interval_count():
    field = VectorField(dim=1, eval=lambda x: x**2)
    x0, t = 0.3, 0.999  # 999 intervals at dt = 1e-3
    oracle = 1.0 / (1.0 - t * x0) ** 2
    assert flow_det_liouville(field, [x0], t, 1e-3) == pytest.approx(oracle, abs=1e-5)


def test_partial_final_step_supported():
    field = damped_oscillator_field(0.5)
    t = 1.0005  # one extra half step
    det = flow_det_liouville(field, [1.0, 0.0], t, 1e-3)
    assert det == pytest.approx(math.exp(-0.5 * t), abs=1e-8)


def test_profile_consistent_with_single_calls():
    field = damped_oscillator_field(0.2)
    profile = det_comparison_profile(field, [1.0, 0.5], [1.0, 3.0], 1e-3)
    lone_var = flow_det_variational(field, [1.0, 0.5], 3.0, 1e-3)
    lone_liou = flow_det_liouville(field, [1.0, 0.5], 3.0, 1e-3)
    assert profile[-1].det_variational == pytest.approx(lone_var, rel=1e-9)
    assert profile[-1].det_liouville == pytest.approx(lone_liou, rel=1e-9)


def test_batch_matches_single_point_path():
    # the batched kernels must reproduce the per-point adapters exactly,
    # including the finite-difference fallbacks
    raw = VectorField(dim=2, eval=lambda z: np.stack([z[..., 1], -np.sin(z[..., 0])], axis=-1))
    points = np.array([[0.4, 0.9], [-1.0, 0.3], [0.0, 1.7]])
    batched = det_comparison_batch(raw, points, [1.0, 2.0], 1e-2)
    for i, point in enumerate(points):
        profile = det_comparison_profile(raw, point, [1.0, 2.0], 1e-2)
        for (t, var, liou), single in zip(batched, profile):
            assert var[i] == single.det_variational
            assert liou[i] == single.det_liouville


def test_batch_with_analytic_derivatives():
    field = damped_oscillator_field(0.4)
    points = np.array([[1.0, 0.0], [0.2, -0.5]])
    (t, var, liou), = det_comparison_batch(field, points, [2.0], 1e-3)
    np.testing.assert_allclose(var, math.exp(-0.8), atol=1e-6)
    np.testing.assert_allclose(liou, math.exp(-0.8), atol=1e-10)


def test_batch_validates_point_shape():
    with pytest.raises(ValueError, match="shape"):
        det_comparison_batch(harmonic_field(), [1.0, 0.0], [1.0], 1e-2)


def test_checkpoint_validation():
    field = harmonic_field()
    with pytest.raises(ValueError):
        det_comparison_profile(field, [1.0, 0.0], [2.0, 1.0], 1e-2)
    with pytest.raises(ValueError):
        det_comparison_profile(field, [1.0, 0.0], [-1.0], 1e-2)
    with pytest.raises(ValueError):
        flow_det_variational(field, [1.0, 0.0], -1.0, 1e-2)
