"""Separable Hamiltonian systems H(q, p) = T(p) + V(q) and two worked systems.

The generated vector field on R^{2n} is z = (q, p) -> (grad T(p), -grad V(q)),
which has zero divergence, so its flow preserves phase-space volume and H is
constant along solutions.  The two concrete systems are the linear harmonic
oscillator (closed-form solutions, elliptic energy level sets) and the
planar pendulum normalised so V(0) = 0, whose energy level E = 2 g/L
separates librations from full rotations.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field as dataclass_field
from typing import Callable

import numpy as np

from .fields import VectorField
from .integrators import NonFiniteStateError, Trajectory, integrate


@dataclass(frozen=True, eq=False)
class PhasePoint:
    """Point z = (q, p) of a 2n-dimensional phase space."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", np.atleast_1d(np.asarray(self.q, dtype=float)))
        object.__setattr__(self, "p", np.atleast_1d(np.asarray(self.p, dtype=float)))
        if self.q.ndim != 1 or self.q.shape != self.p.shape:
            raise ValueError(f"q and p must be 1-d of equal length, got {self.q.shape} and {self.p.shape}")

    @property
    def n(self) -> int:
        return self.q.size

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])

    @classmethod
    def from_array(cls, z) -> "PhasePoint":
        z = np.asarray(z, dtype=float)
        if z.ndim != 1 or z.size % 2 != 0:
            raise ValueError(f"phase array must be 1-d of even length, got shape {z.shape}")
        half = z.size // 2
        return cls(q=z[:half], p=z[half:])


def as_phase_array(z) -> np.ndarray:
    return z.as_array() if isinstance(z, PhasePoint) else np.asarray(z, dtype=float)


@dataclass(frozen=True)
class SeparableHamiltonian:
    """H(q, p) = T(p) + V(q) with n degrees of freedom.

    ``kinetic`` and ``potential`` accept (..., n) arrays and reduce over the
    last axis; the gradients are elementwise and broadcast the same way, so
    energies of whole trajectories evaluate in one call.
    """

    n: int
    kinetic: Callable[[np.ndarray], float]
    grad_kinetic: Callable[[np.ndarray], np.ndarray]
    potential: Callable[[np.ndarray], float]
    grad_potential: Callable[[np.ndarray], np.ndarray]
    label: str = ""

    def vector_field(self) -> VectorField:
        n = self.n

        def xh(z):
            z = np.asarray(z, dtype=float)
            q, p = z[..., :n], z[..., n:]
            return np.concatenate(
                [np.asarray(self.grad_kinetic(p), dtype=float),
                 -np.asarray(self.grad_potential(q), dtype=float)],
                axis=-1,
            )

        return VectorField(dim=2 * n, eval=xh, divergence_analytic=lambda z: 0.0)


def hamiltonian_vector_field(hamiltonian: SeparableHamiltonian) -> VectorField:
    """Vector field z -> (grad T(p), -grad V(q)); its divergence vanishes identically."""
    return hamiltonian.vector_field()


def energy(hamiltonian: SeparableHamiltonian, z) -> float | np.ndarray:
    """Total energy T(p) + V(q); accepts a phase point or an (..., 2n) array."""
    z = as_phase_array(z)
    n = hamiltonian.n
    if z.shape[-1] != 2 * n:
        raise ValueError(f"phase point has dimension {z.shape[-1]}, expected {2 * n}")
    q, p = z[..., :n], z[..., n:]
    value = hamiltonian.kinetic(p) + hamiltonian.potential(q)
    return float(value) if np.ndim(value) == 0 else np.asarray(value, dtype=float)


def harmonic_oscillator(m: float = 1.0, omega: float = 1.0) -> SeparableHamiltonian:
    """H(q, p) = p^2 / 2m + m omega^2 q^2 / 2."""
    if m <= 0:
        raise ValueError(f"mass must be positive, got {m}")
    if omega <= 0:
        raise ValueError(f"frequency must be positive, got {omega}")
    return SeparableHamiltonian(
        n=1,
        kinetic=lambda p: np.sum(p * p, axis=-1) / (2.0 * m),
        grad_kinetic=lambda p: p / m,
        potential=lambda q: 0.5 * m * omega**2 * np.sum(q * q, axis=-1),
        grad_potential=lambda q: m * omega**2 * q,
        label=f"harmonic(m={m:g}, omega={omega:g})",
    )


def harmonic_exact(A: float, delta: float, omega: float, t: float) -> PhasePoint:
    """Closed-form oscillator solution q = A cos(omega (t - delta)), unit mass.

    The momentum is the time derivative p = -A omega sin(omega (t - delta));
    the energy along the solution is A^2 omega^2 / 2, constant in t.
    """
    if omega <= 0:
        raise ValueError(f"frequency must be positive, got {omega}")
    phase = omega * (t - delta)
    return PhasePoint(q=[A * math.cos(phase)], p=[-A * omega * math.sin(phase)])


def pendulum(g_over_L: float = 1.0) -> SeparableHamiltonian:
    """Normalised pendulum H(theta, p) = p^2 / 2 + (g/L)(1 - cos theta), V(0) = 0."""
    if g_over_L <= 0:
        raise ValueError(f"g/L must be positive, got {g_over_L}")
    return SeparableHamiltonian(
        n=1,
        kinetic=lambda p: 0.5 * np.sum(p * p, axis=-1),
        grad_kinetic=lambda p: np.asarray(p, dtype=float),
        potential=lambda q: g_over_L * np.sum(1.0 - np.cos(q), axis=-1),
        grad_potential=lambda q: g_over_L * np.sin(q),
        label=f"pendulum(g/L={g_over_L:g})",
    )


class TurningPointError(ValueError):
    """The requested angle is not reachable at the given energy."""


def pendulum_momentum_from_energy(E: float, theta: float) -> tuple[float, float]:
    """Both momentum branches p = +-sqrt(2 (E - (1 - cos theta))), g/L = 1.

    The branches coincide at zero exactly at turning points; below the
    turning-point energy the radicand is negative and the angle is
    unreachable.
    """
    radicand = 2.0 * (E - (1.0 - math.cos(theta)))
    if radicand < 0.0:
        raise TurningPointError(
            f"angle theta={theta:g} is beyond the turning point at energy E={E:g} "
            f"(radicand {radicand:g} < 0)"
        )
    root = math.sqrt(radicand)
    return (root, -root)


class OrbitClass(enum.Enum):
    LIBRATION = "libration"
    ROTATION = "rotation"
    SEPARATRIX = "separatrix"


def classify_pendulum_orbit(E: float, tol: float = 1e-9, g_over_L: float = 1.0) -> OrbitClass:
    """Classify a pendulum energy level: below 2 g/L librates, above rotates.

    Energies within ``tol`` of the threshold classify as the separatrix;
    an exact E = 2 g/L input lands there.
    """
    if E < 0:
        raise ValueError(f"pendulum energy must be non-negative, got {E}")
    threshold = 2.0 * g_over_L
    if E < threshold - tol:
        return OrbitClass.LIBRATION
    if E > threshold + tol:
        return OrbitClass.ROTATION
    return OrbitClass.SEPARATRIX


def energy_drift(hamiltonian: SeparableHamiltonian, trajectory: Trajectory) -> float:
    """Max |H(z_t) - H(z_0)| over the trajectory samples."""
    energies = energy(hamiltonian, trajectory.states)
    return float(np.max(np.abs(energies - energies[0])))


def wrap_angle(theta):
    """Wrap angles to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(theta, dtype=float), 2.0 * np.pi)


@dataclass(frozen=True)
class OrbitTrace:
    """One planar orbit of a phase portrait; angles kept raw and wrapped."""

    index: int
    initial: np.ndarray
    times: np.ndarray
    q: np.ndarray
    p: np.ndarray

    @property
    def q_wrapped(self) -> np.ndarray:
        return wrap_angle(self.q)


@dataclass(frozen=True)
class PhasePortrait:
    orbits: tuple[OrbitTrace, ...]
    failures: tuple[tuple[int, str], ...] = dataclass_field(default_factory=tuple)


def phase_portrait(
    hamiltonian: SeparableHamiltonian,
    initial_conditions,
    t_final: float,
    dt: float,
    scheme: str = "rk4",
) -> PhasePortrait:
    """Integrate one planar orbit per initial condition.

    Only single-degree-of-freedom systems are drawable.  Orbits whose
    integration blows up are skipped and reported in ``failures``.
    """
    if hamiltonian.n != 1:
        raise ValueError(f"portraits need n = 1, got n = {hamiltonian.n}")
    orbits = []
    failures = []
    for index, z0 in enumerate(initial_conditions):
        z0 = as_phase_array(z0)
        try:
            traj = integrate(hamiltonian, z0, t_final, dt, scheme)
        except NonFiniteStateError as exc:
            failures.append((index, str(exc)))
            continue
        orbits.append(
            OrbitTrace(
                index=index,
                initial=z0,
                times=traj.times,
                q=traj.states[:, 0],
                p=traj.states[:, 1],
            )
        )
    return PhasePortrait(orbits=tuple(orbits), failures=tuple(failures))
