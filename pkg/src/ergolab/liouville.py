"""Jacobian determinant of a flow map, computed by two independent routes.

Route one integrates the variational equation J' = DF(x(s)) J, J(0) = I,
alongside the state and takes det J(t).  Route two uses the Liouville
formula det Dphi^t(x) = exp(integral of div F along the trajectory), with
composite Simpson quadrature (trapezoid when the interval count is odd).
The two routes have independent failure modes, so their agreement is a
meaningful audit: a flow preserves volume exactly when the determinant is
identically one, i.e. when div F vanishes.

Both routes run on a common core that marches a whole batch of initial
points at once.  ``det_comparison_profile`` wraps a single point and works
with any field; ``det_comparison_batch`` amortises the stepping over many
points but requires the field's ``eval`` (and analytic derivatives, when
present) to broadcast over (m, d) arrays, as the builtin fields do.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fields import VectorField, divergence, jacobian
from .integrators import NonFiniteStateError, step_plan


@dataclass(frozen=True)
class DetComparison:
    """Flow-map Jacobian determinant at time t by both routes."""

    t: float
    det_variational: float
    det_liouville: float


def _composite_quadrature(values: np.ndarray, h: float) -> np.ndarray:
    """Integrate (k, m) samples of uniform spacing h along axis 0.

    Composite Simpson when the interval count is even, trapezoid otherwise.
    """
    k = values.shape[0] - 1
    if k == 0:
        return np.zeros(values.shape[1])
    if k % 2 == 0:
        weights = np.ones(k + 1)
        weights[1:-1:2] = 4.0
        weights[2:-1:2] = 2.0
        return (h / 3.0) * (weights @ values)
    return h * (values.sum(axis=0) - 0.5 * (values[0] + values[-1]))


def _single_point_kernels(field: VectorField):
    """Adapters that evaluate any field one point at a time (batch size 1)."""
    eval_fn = field.eval

    def f(X):
        return np.asarray(eval_fn(X[0]), dtype=float)[None, :]

    def jac(X):
        return jacobian(field, X[0])[None, :, :]

    def div(X):
        return np.array([divergence(field, X[0])])

    return f, jac, div


def _broadcast_kernels(field: VectorField):
    """Adapters for fields whose callables broadcast over (m, d) batches."""
    eval_fn = field.eval

    def f(X):
        return np.asarray(eval_fn(X), dtype=float)

    d = field.dim
    if field.jacobian_analytic is not None:
        analytic = field.jacobian_analytic

        def jac(X):
            J = np.asarray(analytic(X), dtype=float)
            if J.shape == (d, d):  # constant matrix: broadcasts in matmul
                return J
            if J.shape == X.shape[:-1] + (d, d):
                return J
            raise ValueError(
                f"analytic Jacobian returned shape {J.shape} for a batch of shape {X.shape}; "
                f"expected ({d}, {d}) or {X.shape[:-1] + (d, d)}"
            )
    else:

        def jac(X):
            h = 1e-5 * np.maximum(1.0, np.max(np.abs(X), axis=-1))
            columns = []
            for j in range(d):
                offset = np.zeros_like(X)
                offset[:, j] = h
                columns.append((f(X + offset) - f(X - offset)) / (2.0 * h[:, None]))
            return np.stack(columns, axis=-1)

    if field.divergence_analytic is not None:
        analytic_div = field.divergence_analytic

        def div(X):
            return np.broadcast_to(
                np.asarray(analytic_div(X), dtype=float), X.shape[:-1]
            ).astype(float)
    else:

        def div(X):
            h = 1e-5 * np.maximum(1.0, np.max(np.abs(X), axis=-1))
            total = np.zeros(X.shape[0])
            for j in range(d):
                offset = np.zeros_like(X)
                offset[:, j] = h
                total += (f(X + offset)[:, j] - f(X - offset)[:, j]) / (2.0 * h)
            return total

    return f, jac, div


def _augmented_rk4_step(f, jac, X, J, dt: float):
    k1x, k1j = f(X), jac(X) @ J
    x2 = X + 0.5 * dt * k1x
    k2x, k2j = f(x2), jac(x2) @ (J + 0.5 * dt * k1j)
    x3 = X + 0.5 * dt * k2x
    k3x, k3j = f(x3), jac(x3) @ (J + 0.5 * dt * k2j)
    x4 = X + dt * k3x
    k4x, k4j = f(x4), jac(x4) @ (J + dt * k3j)
    x_new = X + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    j_new = J + (dt / 6.0) * (k1j + 2.0 * k2j + 2.0 * k3j + k4j)
    if not (np.all(np.isfinite(x_new)) and np.all(np.isfinite(j_new))):
        raise NonFiniteStateError("variational integration produced non-finite values")
    return x_new, j_new


def _advance_segment(f, jac, div, X, J, integral, duration: float, dt: float):
    """March one segment; returns updated (X, J, divergence integral)."""
    if duration == 0.0:
        return X, J, integral
    h = min(dt, duration)
    n_full, remainder = step_plan(duration, h)
    div_nodes = [div(X)]
    for _ in range(n_full):
        X, J = _augmented_rk4_step(f, jac, X, J, h)
        div_nodes.append(div(X))
    integral = integral + _composite_quadrature(np.stack(div_nodes), h)
    if remainder > 0.0:
        d_last = div_nodes[-1]
        X, J = _augmented_rk4_step(f, jac, X, J, remainder)
        integral = integral + 0.5 * remainder * (d_last + div(X))
    return X, J, integral


def _validated_times(checkpoints) -> list[float]:
    times = [float(t) for t in checkpoints]
    if any(t < 0 for t in times):
        raise ValueError(f"checkpoint times must be non-negative, got {times}")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError(f"checkpoint times must be strictly increasing, got {times}")
    return times


def _run(kernels, points: np.ndarray, times: list[float], dt: float):
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    f, jac, div = kernels
    X = np.array(points, dtype=float)
    m, d = X.shape
    J = np.broadcast_to(np.eye(d), (m, d, d)).copy()
    integral = np.zeros(m)
    previous = 0.0
    out = []
    for t in times:
        X, J, integral = _advance_segment(f, jac, div, X, J, integral, t - previous, dt)
        out.append((t, np.linalg.det(J), np.exp(integral)))
        previous = t
    return out


def det_comparison_batch(field: VectorField, points, checkpoints: Sequence[float], dt: float):
    """Both determinant routes for a whole batch of initial points.

    Returns one (t, det_variational, det_liouville) triple per checkpoint,
    the determinants as arrays over the batch.  The field must broadcast.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != field.dim:
        raise ValueError(f"points must have shape (m, {field.dim}), got {points.shape}")
    return _run(_broadcast_kernels(field), points, _validated_times(checkpoints), dt)


def det_comparison_profile(
    field: VectorField, x0, checkpoints: Sequence[float], dt: float
) -> list[DetComparison]:
    """Both determinant routes at each checkpoint time, from one integration pass."""
    x = np.asarray(x0, dtype=float)
    if x.ndim != 1 or x.size != field.dim:
        raise ValueError(f"x0 must be a point of dimension {field.dim}, got shape {x.shape}")
    rows = _run(_single_point_kernels(field), x[None, :], _validated_times(checkpoints), dt)
    return [
        DetComparison(t=t, det_variational=float(var[0]), det_liouville=float(liou[0]))
        for t, var, liou in rows
    ]


def flow_det_variational(field: VectorField, x, t: float, dt: float) -> float:
    """det Dphi^t(x) from the integrated variational equation."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    if t == 0:
        return 1.0
    return det_comparison_profile(field, x, [t], dt)[-1].det_variational


def flow_det_liouville(field: VectorField, x, t: float, dt: float) -> float:
    """det Dphi^t(x) as exp of the divergence integral along the trajectory."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    if t == 0:
        return 1.0
    return det_comparison_profile(field, x, [t], dt)[-1].det_liouville
