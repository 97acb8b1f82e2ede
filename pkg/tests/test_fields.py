import numpy as np
import pytest

from ergolab import (
    VectorField,
    divergence,
    finite_difference_divergence,
    finite_difference_jacobian,
    hamiltonian_vector_field,
    harmonic_oscillator,
    map_jacobian_det,
    pendulum,
)
from ergolab.systems import damped_oscillator_field, harmonic_field, pendulum_field, polynomial_field


def test_divergence_of_radial_field():
    field = VectorField(dim=2, eval=lambda x: x)
    assert finite_difference_divergence(field.eval, [0.3, -0.7]) == pytest.approx(2.0, abs=1e-8)
    assert divergence(field, [0.3, -0.7]) == pytest.approx(2.0, abs=1e-8)


def test_divergence_of_damped_oscillator_is_minus_gamma():
    # oracle: trace of [[0, 1], [-1, -gamma]] is -gamma
    for gamma in (0.1, 0.5):
        field = damped_oscillator_field(gamma)
        assert divergence(field, [0.4, 1.2]) == -gamma
        stripped = VectorField(dim=2, eval=field.eval)
        assert finite_difference_divergence(stripped.eval, [0.4, 1.2]) == pytest.approx(-gamma, abs=1e-8)


def test_hamiltonian_fields_have_zero_divergence():
    rng = np.random.default_rng(0)
    for h in (harmonic_oscillator(1, 1), harmonic_oscillator(2, 3), pendulum(1), pendulum(2)):
        field = hamiltonian_vector_field(h)
        for z in rng.uniform(-2, 2, size=(20, 2)):
            assert divergence(field, z) == 0.0
            assert abs(finite_difference_divergence(field.eval, z)) <= 1e-6


def test_finite_difference_divergence_matches_analytic_everywhere():
    rng = np.random.default_rng(6)
    fields = [
        harmonic_field(1.0, 1.0),
        harmonic_field(2.0, 3.0),
        pendulum_field(1.0),
        damped_oscillator_field(0.5),
        polynomial_field(2, [[[1.0, 2, 1]], [[-1.0, 0, 3]]]),
    ]
    for field in fields:
        for x in rng.uniform(-2.0, 2.0, size=(100, 2)):
            fd = finite_difference_divergence(field.eval, x)
            assert fd == pytest.approx(float(field.divergence_analytic(x)), abs=1e-6)


def test_analytic_jacobian_trace_matches_divergence():
    rng = np.random.default_rng(1)
    fields = [
        harmonic_field(1.0, 2.0),
        pendulum_field(1.5),
        damped_oscillator_field(0.3),
        polynomial_field(2, [[[1.0, 2, 1]], [[-1.0, 0, 3]]]),
    ]
    for field in fields:
        for x in rng.uniform(-1.5, 1.5, size=(25, 2)):
            trace = float(np.trace(field.jacobian_analytic(x)))
            assert trace == pytest.approx(field.divergence_analytic(x), abs=1e-9)


def test_finite_difference_jacobian_matches_analytic_polynomial():
    # F(x, y) = (x^2 y, -y^3): d(F1)/dx = 2xy, d(F1)/dy = x^2, d(F2)/dy = -3y^2
    field = polynomial_field(2, [[[1.0, 2, 1]], [[-1.0, 0, 3]]])
    x = np.array([0.7, -1.1])
    expected = np.array([[2 * 0.7 * -1.1, 0.7**2], [0.0, -3 * (-1.1) ** 2]])
    np.testing.assert_allclose(field.jacobian_analytic(x), expected, atol=1e-12)
    np.testing.assert_allclose(finite_difference_jacobian(field.eval, x), expected, atol=1e-6)
    assert field.divergence_analytic(x) == pytest.approx(2 * 0.7 * -1.1 - 3 * (-1.1) ** 2, abs=1e-12)


def test_map_jacobian_dets():
    assert map_jacobian_det(lambda x: x, [0.2, 0.8]) == pytest.approx(1.0, abs=1e-9)
    scale = lambda x: np.array([2.0 * x[0], 0.5 * x[1]])  # noqa: E731
    assert map_jacobian_det(scale, [1.0, 1.0]) == pytest.approx(1.0, abs=1e-9)
    stretch = lambda x: np.array([2.0 * x[0], x[1]])  # noqa: E731
    assert map_jacobian_det(stretch, [0.3, 0.4]) == pytest.approx(2.0, abs=1e-8)


def test_non_finite_stencil_reported():
    bad = lambda x: np.array([np.nan, x[1]])  # noqa: E731
    with pytest.raises(ValueError, match="non-finite"):
        finite_difference_jacobian(bad, [0.0, 0.0])


def test_polynomial_field_validation():
    with pytest.raises(ValueError):
        polynomial_field(2, [[[1.0, 1]]])  # wrong arity of the term
    with pytest.raises(ValueError):
        polynomial_field(2, [[[1.0, -1, 0]], []])  # negative exponent
    with pytest.raises(ValueError):
        polynomial_field(0, [])
