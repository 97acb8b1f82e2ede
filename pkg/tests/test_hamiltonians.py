import math

import numpy as np
import pytest

from ergolab import (
    OrbitClass,
    PhasePoint,
    SeparableHamiltonian,
    Trajectory,
    TurningPointError,
    classify_pendulum_orbit,
    energy,
    energy_drift,
    hamiltonian_vector_field,
    harmonic_exact,
    harmonic_oscillator,
    integrate,
    pendulum,
    pendulum_momentum_from_energy,
    phase_portrait,
    wrap_angle,
)


def free_particle():
    return SeparableHamiltonian(
        n=2,
        kinetic=lambda p: 0.5 * np.sum(p * p, axis=-1),
        grad_kinetic=lambda p: np.asarray(p, dtype=float),
        potential=lambda q: 0.0 * np.sum(q, axis=-1),
        grad_potential=lambda q: np.zeros_like(np.asarray(q, dtype=float)),
        label="free",
    )


# ---------------------------------------------------------------- vector field

def test_free_particle_field_is_momentum_drift():
    field = hamiltonian_vector_field(free_particle())
    np.testing.assert_allclose(field.eval([0.1, 0.2, 3.0, 4.0]), [3.0, 4.0, 0.0, 0.0])


def test_harmonic_field_value():
    field = hamiltonian_vector_field(harmonic_oscillator(1, 1))
    np.testing.assert_allclose(field.eval([1.0, 0.0]), [0.0, -1.0])


def test_pendulum_field_value():
    field = hamiltonian_vector_field(pendulum(1.0))
    np.testing.assert_allclose(field.eval([math.pi / 2, 0.0]), [0.0, -1.0], atol=1e-15)


def test_supplied_gradients_match_finite_differences():
    rng = np.random.default_rng(2)
    systems = [harmonic_oscillator(1, 1), harmonic_oscillator(2, 3), pendulum(1), pendulum(2)]
    h = 1e-6
    for system in systems:
        for _ in range(20):
            v = rng.uniform(-2, 2, size=1)
            fd_t = (system.kinetic(v + h) - system.kinetic(v - h)) / (2 * h)
            fd_v = (system.potential(v + h) - system.potential(v - h)) / (2 * h)
            assert fd_t == pytest.approx(float(system.grad_kinetic(v)[0]), abs=1e-6)
            assert fd_v == pytest.approx(float(system.grad_potential(v)[0]), abs=1e-6)


# ---------------------------------------------------------------- energy

def test_energy_values():
    assert energy(harmonic_oscillator(1, 1), [1.0, 0.0]) == 0.5
    assert energy(harmonic_oscillator(2, 3), [0.0, 2.0]) == 1.0
    assert energy(pendulum(1.0), [0.0, 2.0]) == 2.0
    assert energy(pendulum(1.0), [math.pi, 0.0]) == 2.0
    assert energy(pendulum(1.0), [0.0, 0.0]) == 0.0


def test_energy_at_equilibrium_is_potential_value():
    h = harmonic_oscillator(2, 3)
    assert energy(h, [0.0, 0.0]) == 0.0  # stationary point with grad V = 0


def test_energy_accepts_phase_points_and_batches():
    h = harmonic_oscillator(1, 1)
    assert energy(h, PhasePoint(q=[1.0], p=[0.0])) == 0.5
    batch = np.array([[1.0, 0.0], [0.0, 2.0]])
    np.testing.assert_allclose(energy(h, batch), [0.5, 2.0])


def test_constructor_validation():
    with pytest.raises(ValueError):
        harmonic_oscillator(0.0, 1.0)
    with pytest.raises(ValueError):
        harmonic_oscillator(1.0, -1.0)
    with pytest.raises(ValueError):
        pendulum(0.0)


# ---------------------------------------------------------------- closed form

def test_harmonic_exact_endpoints():
    z = harmonic_exact(A=2.0, delta=0.3, omega=1.5, t=0.3)
    np.testing.assert_allclose(z.as_array(), [2.0, 0.0], atol=1e-15)
    quarter = harmonic_exact(A=2.0, delta=0.0, omega=1.5, t=math.pi / (2 * 1.5))
    np.testing.assert_allclose(quarter.as_array(), [0.0, -3.0], atol=1e-14)


def test_harmonic_exact_energy_is_constant():
    h = harmonic_oscillator(1.0, 2.0)
    rng = np.random.default_rng(3)
    for t in rng.uniform(0, 20, size=40):
        z = harmonic_exact(A=0.7, delta=0.1, omega=2.0, t=t)
        assert energy(h, z) == pytest.approx(0.7**2 * 2.0**2 / 2.0, abs=1e-12)


def test_harmonic_exact_satisfies_the_equations_of_motion():
    field = hamiltonian_vector_field(harmonic_oscillator(1.0, 2.0))
    rng = np.random.default_rng(4)
    h = 1e-5
    for t in rng.uniform(0, 10, size=100):
        plus = harmonic_exact(1.3, 0.2, 2.0, t + h).as_array()
        minus = harmonic_exact(1.3, 0.2, 2.0, t - h).as_array()
        derivative = (plus - minus) / (2 * h)
        np.testing.assert_allclose(
            derivative, field.eval(harmonic_exact(1.3, 0.2, 2.0, t).as_array()), atol=1e-6
        )


# ---------------------------------------------------------------- pendulum branches

def test_momentum_branches_on_the_separatrix_tip():
    assert pendulum_momentum_from_energy(2.0, math.pi) == (0.0, -0.0)


def test_momentum_branches_at_the_bottom():
    plus, minus = pendulum_momentum_from_energy(2.0, 0.0)
    assert plus == 2.0 and minus == -2.0


def test_momentum_raises_beyond_turning_point():
    with pytest.raises(TurningPointError):
        pendulum_momentum_from_energy(1.0, math.pi)


def test_orbit_classification():
    assert classify_pendulum_orbit(1.0) is OrbitClass.LIBRATION
    assert classify_pendulum_orbit(3.0) is OrbitClass.ROTATION
    assert classify_pendulum_orbit(2.0) is OrbitClass.SEPARATRIX
    assert classify_pendulum_orbit(2.0 - 1e-12) is OrbitClass.SEPARATRIX  # inside tol
    assert classify_pendulum_orbit(4.0, g_over_L=2.0) is OrbitClass.SEPARATRIX
    with pytest.raises(ValueError):
        classify_pendulum_orbit(-0.5)


def test_classification_constant_along_numerical_orbits():
    h = pendulum(1.0)
    for e_level, expected in ((1.0, OrbitClass.LIBRATION), (3.0, OrbitClass.ROTATION)):
        traj = integrate(h, [0.0, math.sqrt(2 * e_level)], 20.0, 1e-3)
        classes = {classify_pendulum_orbit(float(e)) for e in energy(h, traj.states[::100])}
        assert classes == {expected}


# ---------------------------------------------------------------- drift / portraits

def test_energy_drift_vanishes_on_the_closed_form_solution():
    h = harmonic_oscillator(1, 1)
    times = np.linspace(0.0, 10.0, 1001)
    states = np.array([harmonic_exact(1.0, 0.0, 1.0, t).as_array() for t in times])
    traj = Trajectory(times=times, states=states, scheme="exact", dt=0.01, final_step=0.01)
    assert energy_drift(h, traj) <= 1e-12


def test_leapfrog_drift_scales_quadratically_in_dt():
    h = harmonic_oscillator(1, 1)
    drifts = []
    for dt in (1e-2, 1e-3):
        traj = integrate(h, [1.0, 0.0], 10.0, dt, scheme="leapfrog")
        drifts.append(energy_drift(h, traj))
    ratio = drifts[0] / drifts[1]
    assert 50.0 <= ratio <= 200.0  # nominal 100 for a second-order scheme


def test_rk4_matches_the_closed_form_over_ten_time_units():
    for omega in (1.0, 2.0):
        h = harmonic_oscillator(1.0, omega)
        for amplitude in (0.5, 1.0, 2.0):
            traj = integrate(h, [amplitude, 0.0], 10.0, 1e-3)
            q_exact = amplitude * np.cos(omega * traj.times)
            p_exact = -amplitude * omega * np.sin(omega * traj.times)
            gap = max(
                float(np.max(np.abs(traj.states[:, 0] - q_exact))),
                float(np.max(np.abs(traj.states[:, 1] - p_exact))),
            )
            assert gap <= 1e-6, f"A={amplitude}, omega={omega}: sup error {gap}"


def test_on_orbit_momentum_identity_for_the_pendulum():
    h = pendulum(1.0)
    e_level = 1.0
    traj = integrate(h, [0.0, math.sqrt(2 * e_level)], 20.0, 1e-3)
    theta, p = traj.states[:, 0], traj.states[:, 1]
    residual = p**2 - 2.0 * (e_level - (1.0 - np.cos(theta)))
    assert np.max(np.abs(residual)) <= 1e-5


def test_portrait_circles_of_radius_sqrt_2e():
    h = harmonic_oscillator(1, 1)
    e_level = 0.5
    portrait = phase_portrait(h, [np.array([1.0, 0.0])], 2 * math.pi, 1e-3)
    trace = portrait.orbits[0]
    radii = np.hypot(trace.q, trace.p)
    assert np.max(np.abs(radii - math.sqrt(2 * e_level))) <= 1e-4


def test_portrait_reports_and_skips_failed_orbits():
    # inverted quartic potential: the force +4q^3 blows the orbit up quickly
    runaway = SeparableHamiltonian(
        n=1,
        kinetic=lambda p: 0.5 * np.sum(p * p, axis=-1),
        grad_kinetic=lambda p: np.asarray(p, dtype=float),
        potential=lambda q: -np.sum(q**4, axis=-1),
        grad_potential=lambda q: -4.0 * q**3,
        label="runaway",
    )
    with np.errstate(over="ignore", invalid="ignore"):
        portrait = phase_portrait(runaway, [[0.1, 0.0], [30.0, 30.0]], 8.0, 0.01)
    assert len(portrait.orbits) == 1 and portrait.orbits[0].index == 0
    assert len(portrait.failures) == 1 and portrait.failures[0][0] == 1


def test_portrait_requires_one_degree_of_freedom():
    with pytest.raises(ValueError):
        phase_portrait(free_particle(), [[0.0, 0.0, 1.0, 1.0]], 1.0, 0.1)


# ---------------------------------------------------------------- small pieces

def test_wrap_angle_lands_in_half_open_interval():
    np.testing.assert_allclose(wrap_angle([0.0, math.pi / 2]), [0.0, math.pi / 2])
    assert wrap_angle(math.pi) == math.pi
    assert wrap_angle(-math.pi) == math.pi  # -pi maps to the included endpoint
    assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
    spun = wrap_angle(np.array([7 * math.pi, -5 * math.pi / 2]))
    np.testing.assert_allclose(spun, [math.pi, -math.pi / 2], atol=1e-12)


def test_phase_point_round_trip_and_validation():
    z = PhasePoint.from_array([1.0, 2.0, 3.0, 4.0])
    np.testing.assert_array_equal(z.q, [1.0, 2.0])
    np.testing.assert_array_equal(z.p, [3.0, 4.0])
    np.testing.assert_array_equal(z.as_array(), [1.0, 2.0, 3.0, 4.0])
    assert z.n == 2
    with pytest.raises(ValueError):
        PhasePoint(q=[1.0, 2.0], p=[1.0])
    with pytest.raises(ValueError):
        PhasePoint.from_array([1.0, 2.0, 3.0])
