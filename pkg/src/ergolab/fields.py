"""Vector fields, discrete maps, and finite-difference derivative estimators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class VectorField:
    """Autonomous vector field on R^d.

    ``eval`` maps a state of shape (d,) to its velocity of shape (d,); the
    builtin fields broadcast over (m, d) batches as well, and so do their
    analytic derivatives (a requirement for the batched determinant audits).
    Analytic divergence and Jacobian are optional shortcuts; when absent,
    central differences are used.  When both are supplied, trace(jacobian)
    must equal the divergence.
    """

    dim: int
    eval: Callable[[np.ndarray], np.ndarray]
    divergence_analytic: Optional[Callable[[np.ndarray], float]] = None
    jacobian_analytic: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, x):
        return self.eval(x)


@dataclass(frozen=True)
class PointMap:
    """Discrete-time map on R^d; ``eval`` broadcasts over (m, d) batches."""

    dim: int
    eval: Callable[[np.ndarray], np.ndarray]

    def __call__(self, x):
        return self.eval(x)


def fd_step(x: np.ndarray) -> float:
    """Default central-difference step: 1e-5 scaled by the sup norm of x."""
    return 1e-5 * max(1.0, float(np.max(np.abs(x))))


def finite_difference_jacobian(func, x, h: Optional[float] = None) -> np.ndarray:
    """Central-difference Jacobian of func at x, one column per coordinate."""
    x = np.asarray(x, dtype=float)
    step = fd_step(x) if h is None else float(h)
    if step <= 0:
        raise ValueError(f"difference step must be positive, got {step}")
    columns = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = step
        columns.append((np.asarray(func(x + e), dtype=float) - np.asarray(func(x - e), dtype=float)) / (2 * step))
    jac = np.stack(columns, axis=-1)
    if not np.all(np.isfinite(jac)):
        bad = [j for j in range(x.size) if not np.all(np.isfinite(jac[:, j]))]
        raise ValueError(f"non-finite columns {bad} in the difference stencil at x={x}")
    return jac


def finite_difference_divergence(func, x, h: Optional[float] = None) -> float:
    """Central-difference divergence: sum_j (F_j(x+h e_j) - F_j(x-h e_j)) / 2h."""
    x = np.asarray(x, dtype=float)
    step = fd_step(x) if h is None else float(h)
    if step <= 0:
        raise ValueError(f"difference step must be positive, got {step}")
    total = 0.0
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = step
        fp = np.asarray(func(x + e), dtype=float)
        fm = np.asarray(func(x - e), dtype=float)
        total += (fp[j] - fm[j]) / (2 * step)
    if not np.isfinite(total):
        raise ValueError(f"non-finite divergence stencil at x={x}")
    return float(total)


def divergence(field: VectorField, x, h: Optional[float] = None) -> float:
    """Divergence of the field at x: analytic when available, else central differences."""
    x = np.asarray(x, dtype=float)
    if field.divergence_analytic is not None:
        return float(field.divergence_analytic(x))
    return finite_difference_divergence(field.eval, x, h)


def jacobian(field: VectorField, x, h: Optional[float] = None) -> np.ndarray:
    """Jacobian matrix of the field at x: analytic when available, else central differences."""
    x = np.asarray(x, dtype=float)
    if field.jacobian_analytic is not None:
        return np.asarray(field.jacobian_analytic(x), dtype=float)
    return finite_difference_jacobian(field.eval, x, h)


def map_jacobian_det(f, x, h: Optional[float] = None) -> float:
    """Determinant of the central-difference Jacobian of a map at x."""
    func = f.eval if isinstance(f, PointMap) else f
    return float(np.linalg.det(finite_difference_jacobian(func, x, h)))
