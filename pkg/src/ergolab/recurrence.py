"""Empirical return-time statistics for maps and flows.

For a measure-preserving system, almost every start point of a positive
measure set comes back to the set, and does so infinitely often, so the
returning fraction of a sampled experiment should saturate at 1 and return
counts should keep growing with the horizon.  Non-preserving controls
(contractions, damped flows) expose the invariance hypothesis by failing to
return.  For maps a return is any iterate landing in the set; for sampled
flows a return only counts after the trajectory has left the set, otherwise
mere residence at consecutive sample times would count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .boxes import Box
from .integrators import rk4_step_batch, step_plan
from .montecarlo import as_indicator, _apply_map
from .sampling import rejection_sample


@dataclass(frozen=True)
class ReturnRecord:
    """Returns of one orbit: step count for maps, sample time for flows."""

    start: np.ndarray
    first_return: Optional[float]
    return_count: int
    horizon: float

    def __post_init__(self):
        if (self.first_return is None) != (self.return_count == 0):
            raise ValueError("first_return must be present exactly when returns happened")


@dataclass(frozen=True)
class RecurrenceReport:
    records: tuple[ReturnRecord, ...]
    returning_fraction: float
    mean_first_return: Optional[float]
    set_measure_estimate: float
    seed: int


def _batch_map_returns(f, indicator, starts: np.ndarray, horizon: int):
    """Iterate all start points together; count hits at steps 1..horizon."""
    states = np.array(starts, dtype=float)
    counts = np.zeros(states.shape[0], dtype=int)
    first = np.full(states.shape[0], -1, dtype=int)
    for step in range(1, horizon + 1):
        states = np.asarray(_apply_map(f, states), dtype=float)
        hit = np.asarray(indicator(states), dtype=bool)
        first[(first < 0) & hit] = step
        counts += hit
    return first, counts


def orbit_returns_map(f, E, x0, horizon: int) -> ReturnRecord:
    """Track returns of a single start point under iteration of the map."""
    if horizon < 1:
        raise ValueError(f"horizon must be at least 1, got {horizon}")
    indicator = as_indicator(E)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if not bool(np.asarray(indicator(x0[None, :]))[0]):
        raise ValueError(f"start point {x0} is not in the target set")
    first, counts = _batch_map_returns(f, indicator, x0[None, :], horizon)
    return ReturnRecord(
        start=x0,
        first_return=int(first[0]) if counts[0] > 0 else None,
        return_count=int(counts[0]),
        horizon=horizon,
    )


def _make_report(starts, first, counts, horizon, measure_estimate, seed) -> RecurrenceReport:
    records = tuple(
        ReturnRecord(
            start=starts[i],
            first_return=(None if counts[i] == 0 else float(first[i])),
            return_count=int(counts[i]),
            horizon=horizon,
        )
        for i in range(starts.shape[0])
    )
    returning = counts > 0
    fraction = float(np.mean(returning))
    mean_first = float(np.mean(first[returning])) if np.any(returning) else None
    return RecurrenceReport(
        records=records,
        returning_fraction=fraction,
        mean_first_return=mean_first,
        set_measure_estimate=measure_estimate,
        seed=seed,
    )


def recurrence_experiment_map(
    f, E, domain: Box, n_points: int, horizon: int, seed: int
) -> RecurrenceReport:
    """Sample start points uniformly on the set and aggregate their returns.

    Start points come from rejection sampling inside the domain box; the
    relative acceptance of that same stream yields ``set_measure_estimate``.
    Deterministic for a fixed seed.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be at least 1, got {horizon}")
    indicator = as_indicator(E)
    starts, drawn, accepted = rejection_sample(indicator, domain, n_points, seed)
    measure_estimate = domain.volume() * accepted / drawn
    first, counts = _batch_map_returns(f, indicator, starts, horizon)
    return _make_report(starts, first.astype(float), counts, horizon, measure_estimate, seed)


def recurrence_experiment_flow(
    field, E, domain: Box, n_points: int, t_horizon: float, dt: float, seed: int
) -> RecurrenceReport:
    """Return statistics for a flow sampled at step dt.

    A return is the first sample time with the state in the set after at
    least one sample outside it; every outside-to-inside crossing increments
    the return count.  The field is evaluated on the whole (m, d) batch of
    trajectories at once, so it must broadcast.
    """
    indicator = as_indicator(E)
    starts, drawn, accepted = rejection_sample(indicator, domain, n_points, seed)
    measure_estimate = domain.volume() * accepted / drawn
    n_full, remainder = step_plan(t_horizon, dt)

    f = field.eval
    states = np.array(starts, dtype=float)
    inside_prev = np.asarray(indicator(states), dtype=bool)
    counts = np.zeros(states.shape[0], dtype=int)
    first = np.full(states.shape[0], np.nan)
    step_sizes = [dt] * n_full + ([remainder] if remainder > 0.0 else [])
    t = 0.0
    for h in step_sizes:
        states = rk4_step_batch(f, states, h)
        t += h
        inside = np.asarray(indicator(states), dtype=bool)
        entered = inside & ~inside_prev
        first[np.isnan(first) & entered] = t
        counts += entered
        inside_prev = inside
    return _make_report(starts, first, counts, t_horizon, measure_estimate, seed)


def return_count_growth(f, E, x0, horizons) -> list[int]:
    """Return counts of one orbit at each of several increasing horizons."""
    horizons = [int(h) for h in horizons]
    if any(h < 1 for h in horizons) or any(b <= a for a, b in zip(horizons, horizons[1:])):
        raise ValueError(f"horizons must be strictly increasing positive integers, got {horizons}")
    indicator = as_indicator(E)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if not bool(np.asarray(indicator(x0[None, :]))[0]):
        raise ValueError(f"start point {x0} is not in the target set")
    state = x0[None, :]
    counts = []
    total = 0
    previous = 0
    for horizon in horizons:
        for _ in range(previous + 1, horizon + 1):
            state = np.asarray(_apply_map(f, state), dtype=float)
            total += bool(np.asarray(indicator(state))[0])
        counts.append(total)
        previous = horizon
    return counts
