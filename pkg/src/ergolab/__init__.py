"""Numerical laboratory for measure-preserving dynamics.

Building blocks: Lebesgue measure on boxes and simple functions, seeded
Monte Carlo volume and integral estimation, two measure-invariance tests,
fixed-step integrators with dual-route flow-volume audits, separable
Hamiltonian systems, and empirical return-time experiments.  The ``ergolab``
CLI runs all of it from JSON configs and writes CSV tables, SVG portraits
and run manifests.
"""

from .boxes import Box, BoxUnion, Interval, SimpleFunction, box_volume, integrate_simple
from .fields import (
    PointMap,
    VectorField,
    divergence,
    finite_difference_divergence,
    finite_difference_jacobian,
    map_jacobian_det,
)
from .hamiltonians import (
    OrbitClass,
    PhasePoint,
    SeparableHamiltonian,
    TurningPointError,
    classify_pendulum_orbit,
    energy,
    energy_drift,
    hamiltonian_vector_field,
    harmonic_exact,
    harmonic_oscillator,
    pendulum,
    pendulum_momentum_from_energy,
    phase_portrait,
    wrap_angle,
)
from .integrators import (
    NonFiniteStateError,
    Trajectory,
    integrate,
    leapfrog_step,
    rk4_step,
    symplectic_euler_step,
)
from .liouville import (
    DetComparison,
    det_comparison_batch,
    det_comparison_profile,
    flow_det_liouville,
    flow_det_variational,
)
from .montecarlo import (
    InvarianceRecord,
    InvarianceReport,
    VolumeEstimate,
    density_ratio,
    estimate_volume_mc,
    invariance_by_integrals,
    preimage_measure_discrepancy,
)
from .recurrence import (
    RecurrenceReport,
    ReturnRecord,
    orbit_returns_map,
    recurrence_experiment_flow,
    recurrence_experiment_map,
    return_count_growth,
)

__version__ = "0.1.0"

__all__ = [
    "Box",
    "BoxUnion",
    "DetComparison",
    "Interval",
    "InvarianceRecord",
    "InvarianceReport",
    "NonFiniteStateError",
    "OrbitClass",
    "PhasePoint",
    "PointMap",
    "RecurrenceReport",
    "ReturnRecord",
    "SeparableHamiltonian",
    "SimpleFunction",
    "Trajectory",
    "TurningPointError",
    "VectorField",
    "VolumeEstimate",
    "box_volume",
    "classify_pendulum_orbit",
    "density_ratio",
    "det_comparison_batch",
    "det_comparison_profile",
    "divergence",
    "energy",
    "energy_drift",
    "estimate_volume_mc",
    "finite_difference_divergence",
    "finite_difference_jacobian",
    "flow_det_liouville",
    "flow_det_variational",
    "hamiltonian_vector_field",
    "harmonic_exact",
    "harmonic_oscillator",
    "integrate",
    "integrate_simple",
    "invariance_by_integrals",
    "leapfrog_step",
    "map_jacobian_det",
    "orbit_returns_map",
    "pendulum",
    "pendulum_momentum_from_energy",
    "phase_portrait",
    "preimage_measure_discrepancy",
    "recurrence_experiment_flow",
    "recurrence_experiment_map",
    "return_count_growth",
    "rk4_step",
    "symplectic_euler_step",
    "wrap_angle",
]
