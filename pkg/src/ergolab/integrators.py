"""Fixed-step ODE integrators: classical RK4 and two symplectic schemes.

Fixed steps keep time grids uniform, which the quadrature in the volume
audits and the trajectory comparison tests rely on.  If the requested horizon
is not a multiple of dt, one shortened final step completes it; the actual
size of that step is recorded on the trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import VectorField

SCHEMES = ("rk4", "symplectic_euler", "leapfrog")

# relative slack when deciding whether a final partial step is needed
_STEP_EPS = 1e-9


class NonFiniteStateError(RuntimeError):
    """A step produced a non-finite state."""

    def __init__(self, message: str, step_index: int | None = None):
        super().__init__(message)
        self.step_index = step_index


def _checked(x: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(x)):
        raise NonFiniteStateError(f"{what} produced a non-finite state: {x}")
    return x


def rk4_step(field, x, dt: float) -> np.ndarray:
    """One classical 4-stage Runge-Kutta step; local error O(dt^5)."""
    if dt == 0:
        raise ValueError("dt must be nonzero")
    f = field.eval if isinstance(field, VectorField) else field
    x = np.asarray(x, dtype=float)
    k1 = np.asarray(f(x), dtype=float)
    k2 = np.asarray(f(x + 0.5 * dt * k1), dtype=float)
    k3 = np.asarray(f(x + 0.5 * dt * k2), dtype=float)
    k4 = np.asarray(f(x + dt * k3), dtype=float)
    return _checked(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), "rk4 step")


def _split(z: np.ndarray, n: int):
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != 2 * n:
        raise ValueError(f"phase point has dimension {z.shape[-1]}, expected {2 * n}")
    return z[..., :n], z[..., n:]


def symplectic_euler_step(hamiltonian, z, dt: float) -> np.ndarray:
    """Momentum kick then drift: p -= dt grad V(q); q += dt grad T(p_new)."""
    if dt == 0:
        raise ValueError("dt must be nonzero")
    q, p = _split(z, hamiltonian.n)
    p_new = p - dt * np.asarray(hamiltonian.grad_potential(q), dtype=float)
    q_new = q + dt * np.asarray(hamiltonian.grad_kinetic(p_new), dtype=float)
    return _checked(np.concatenate([q_new, p_new], axis=-1), "symplectic Euler step")


def leapfrog_step(hamiltonian, z, dt: float) -> np.ndarray:
    """Stormer-Verlet kick-drift-kick: second order, symplectic, time-reversible."""
    if dt == 0:
        raise ValueError("dt must be nonzero")
    q, p = _split(z, hamiltonian.n)
    p_half = p - 0.5 * dt * np.asarray(hamiltonian.grad_potential(q), dtype=float)
    q_new = q + dt * np.asarray(hamiltonian.grad_kinetic(p_half), dtype=float)
    p_new = p_half - 0.5 * dt * np.asarray(hamiltonian.grad_potential(q_new), dtype=float)
    return _checked(np.concatenate([q_new, p_new], axis=-1), "leapfrog step")


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled solution; the last step may be shorter than dt."""

    times: np.ndarray
    states: np.ndarray
    scheme: str
    dt: float
    final_step: float

    def __post_init__(self):
        if len(self.times) != len(self.states) or len(self.times) < 1:
            raise ValueError("times and states must align and be nonempty")
        if self.times[0] != 0.0:
            raise ValueError("trajectories start at t = 0")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")


def step_plan(t_final: float, dt: float) -> tuple[int, float]:
    """Number of full dt steps and the remainder needed to land on t_final."""
    if t_final <= 0:
        raise ValueError(f"t_final must be positive, got {t_final}")
    if not 0 < dt <= t_final:
        raise ValueError(f"need 0 < dt <= t_final, got dt={dt}, t_final={t_final}")
    n_full = int(np.floor(t_final / dt + _STEP_EPS))
    remainder = t_final - n_full * dt
    if remainder <= dt * _STEP_EPS:
        remainder = 0.0
    return n_full, remainder


def _stepper(system, scheme: str):
    if scheme == "rk4":
        field = system.vector_field() if hasattr(system, "vector_field") else system
        if not isinstance(field, VectorField):
            raise TypeError(f"rk4 needs a VectorField or a Hamiltonian, got {system!r}")
        return lambda x, h: rk4_step(field, x, h)
    if scheme in ("symplectic_euler", "leapfrog"):
        if not hasattr(system, "grad_potential"):
            raise TypeError(f"scheme {scheme!r} needs a separable Hamiltonian, got {system!r}")
        step = symplectic_euler_step if scheme == "symplectic_euler" else leapfrog_step
        return lambda x, h: step(system, x, h)
    raise ValueError(f"unknown scheme {scheme!r}; choose one of {SCHEMES}")


def integrate(system, z0, t_final: float, dt: float, scheme: str = "rk4") -> Trajectory:
    """Integrate from z0 over [0, t_final] with fixed step dt.

    ``system`` is a VectorField (rk4) or a separable Hamiltonian (any scheme).
    A non-finite state aborts with the index of the failing step.
    """
    step = _stepper(system, scheme)
    n_full, remainder = step_plan(t_final, dt)
    state = np.asarray(z0, dtype=float)
    states = [state]
    times = [0.0]
    for i in range(n_full):
        try:
            state = step(state, dt)
        except NonFiniteStateError as exc:
            raise NonFiniteStateError(
                f"non-finite state at step {i + 1} (t = {(i + 1) * dt:g}): {exc}", step_index=i + 1
            ) from exc
        states.append(state)
        times.append((i + 1) * dt)
    if remainder > 0.0:
        try:
            state = step(state, remainder)
        except NonFiniteStateError as exc:
            raise NonFiniteStateError(
                f"non-finite state at final partial step (t = {t_final:g}): {exc}",
                step_index=n_full + 1,
            ) from exc
        states.append(state)
        times.append(t_final)
    return Trajectory(
        times=np.asarray(times, dtype=float),
        states=np.asarray(states, dtype=float),
        scheme=scheme,
        dt=dt,
        final_step=remainder if remainder > 0.0 else dt,
    )


def rk4_step_batch(f, states: np.ndarray, dt: float) -> np.ndarray:
    """RK4 step applied to a whole (m, d) batch through a broadcasting field."""
    k1 = np.asarray(f(states), dtype=float)
    k2 = np.asarray(f(states + 0.5 * dt * k1), dtype=float)
    k3 = np.asarray(f(states + 0.5 * dt * k2), dtype=float)
    k4 = np.asarray(f(states + dt * k3), dtype=float)
    out = states + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise NonFiniteStateError("batched rk4 step produced non-finite states")
    return out
