"""Monte Carlo volume and integral estimation, and two invariance tests.

An invariant measure can be recognised in two equivalent ways: every
integrable test function has equal integrals before and after composing with
the map, or every measurable set has the measure of its preimage.  Both
criteria are implemented here at desk scale: the first by paired Monte Carlo
over a shared sample stream, the second by midpoint counting on a uniform
grid of cells.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .boxes import Box, BoxUnion
from .sampling import block_ranges, sample_ball, uniform_in_box, uniform_in_box_block


def as_indicator(region):
    """Normalise a region argument (Box, BoxUnion or predicate) to a callable."""
    if isinstance(region, (Box, BoxUnion)):
        return region.contains
    if callable(region):
        return region
    raise TypeError(f"cannot interpret {region!r} as an indicator")


def _bool_mask(values, count: int) -> np.ndarray:
    mask = np.asarray(values)
    if mask.shape != (count,):
        raise ValueError(
            f"indicator must return a boolean array of shape ({count},), got shape {mask.shape}"
        )
    return mask.astype(bool)


@dataclass(frozen=True)
class VolumeEstimate:
    """Monte Carlo estimate of the measure of a set inside a domain box.

    ``standard_error`` is the binomial error sqrt(p(1-p)/n) scaled by the
    domain volume, with p the hit fraction.
    """

    estimate: float
    standard_error: float
    n_samples: int
    seed: int


def estimate_volume_mc(indicator, domain: Box, n: int, seed: int, workers: int = 1) -> VolumeEstimate:
    """Estimate the measure of {x in domain : indicator(x)} from n uniform samples.

    Samples are drawn in fixed blocks keyed by (seed, block index), so the
    result is bit-identical for any ``workers`` count; workers only split the
    blocks.  ``indicator`` receives an (m, d) array and must return (m,) bools.
    """
    if n < 1:
        raise ValueError(f"need n >= 1 samples, got {n}")
    if workers < 1:
        raise ValueError(f"need workers >= 1, got {workers}")
    ind = as_indicator(indicator)

    def count_block(args) -> int:
        block, start, stop = args
        pts = uniform_in_box_block(domain, block, stop - start, seed)
        return int(np.count_nonzero(_bool_mask(ind(pts), stop - start)))

    ranges = list(block_ranges(n))
    if workers == 1 or len(ranges) == 1:
        hits = sum(count_block(r) for r in ranges)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(count_block, ranges))

    volume = domain.volume()
    p_hat = hits / n
    return VolumeEstimate(
        estimate=p_hat * volume,
        standard_error=float(np.sqrt(p_hat * (1.0 - p_hat) / n)) * volume,
        n_samples=n,
        seed=seed,
    )


def density_ratio(a, indicator, eps: float, n: int, seed: int) -> float:
    """Fraction of the ball B(a, eps) covered by the set, estimated by sampling.

    Estimates the ratio measure(B(a, eps) ∩ A) / measure(B(a, eps)); for a
    density point of A the ratio tends to 1 as eps shrinks.
    """
    if eps <= 0:
        raise ValueError(f"ball radius eps must be positive, got {eps}")
    if n < 1:
        raise ValueError(f"need n >= 1 samples, got {n}")
    ind = as_indicator(indicator)
    pts = sample_ball(np.asarray(a, dtype=float), eps, n, seed)
    return float(np.count_nonzero(_bool_mask(ind(pts), n))) / n


@dataclass(frozen=True)
class InvarianceRecord:
    """Paired integral estimates for one test function."""

    name: str
    lhs_integral: float
    rhs_integral: float
    discrepancy: float
    combined_mc_error: float


@dataclass(frozen=True)
class InvarianceReport:
    per_test_function: tuple[InvarianceRecord, ...]
    verdict: bool
    k_sigma: float


def invariance_by_integrals(
    f, test_functions, domain: Box, n: int, seed: int, k_sigma: float = 4.0
) -> InvarianceReport:
    """Test whether f preserves the volume measure via paired integrals.

    For each test function phi, both integrals int phi and int phi∘f over the
    domain are estimated from the *same* uniform samples, so the discrepancy
    of an identity map is exactly zero.  ``combined_mc_error`` is the Monte
    Carlo standard error of the paired difference; the verdict passes when
    every discrepancy stays within ``k_sigma`` of it.

    ``f`` maps (m, d) arrays into the domain; each test function maps an
    (m, d) array to (m,) values and must be bounded on the domain.
    """
    test_functions = list(test_functions)
    if not test_functions:
        raise ValueError("need at least one test function")
    if n < 2:
        raise ValueError(f"need n >= 2 samples for an error estimate, got {n}")

    x = uniform_in_box(domain, n, seed)
    fx = np.asarray(_apply_map(f, x), dtype=float)
    if fx.shape != x.shape:
        raise ValueError(f"map returned shape {fx.shape}, expected {x.shape}")
    outside = ~domain.contains(fx)
    if np.any(outside):
        bad = int(np.argmax(outside))
        raise ValueError(
            f"map leaves the domain: sample {bad} maps {x[bad]} to {fx[bad]} outside {domain!r}"
        )

    volume = domain.volume()
    records = []
    for i, phi in enumerate(test_functions):
        name = getattr(phi, "__name__", None) or f"phi_{i}"
        u = np.asarray(phi(x), dtype=float)
        v = np.asarray(phi(fx), dtype=float)
        if u.shape != (n,) or v.shape != (n,):
            raise ValueError(f"test function {name!r} must return shape ({n},)")
        diff = u - v
        lhs = volume * float(np.mean(u))
        rhs = volume * float(np.mean(v))
        error = volume * float(np.std(diff, ddof=1)) / np.sqrt(n)
        records.append(
            InvarianceRecord(
                name=name,
                lhs_integral=lhs,
                rhs_integral=rhs,
                discrepancy=abs(lhs - rhs),
                combined_mc_error=error,
            )
        )
    verdict = all(r.discrepancy <= k_sigma * r.combined_mc_error for r in records)
    return InvarianceReport(per_test_function=tuple(records), verdict=verdict, k_sigma=k_sigma)


def _apply_map(f, points):
    eval_fn = getattr(f, "eval", None)
    return eval_fn(points) if eval_fn is not None else f(points)


def grid_centers(domain: Box, grid_per_axis: int) -> np.ndarray:
    """Midpoints of a uniform grid partition of the domain, shape (g^d, d)."""
    axes = [
        domain.lows[j] + (np.arange(grid_per_axis) + 0.5) * domain.widths[j] / grid_per_axis
        for j in range(domain.dim)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def preimage_measure_discrepancy(f, E, domain: Box, grid_per_axis: int) -> float:
    """|measure(E) - measure(f^-1 E)| by midpoint counting on a uniform grid.

    Cells are assigned by their centers, so boundary error is of order
    (cell width) x (boundary size) for sets with piecewise-smooth boundary.
    ``E`` must be a Box or BoxUnion contained in the domain.
    """
    if grid_per_axis < 2:
        raise ValueError(f"need grid_per_axis >= 2, got {grid_per_axis}")
    boxes = E.boxes if isinstance(E, BoxUnion) else (E,)
    if not all(isinstance(b, Box) for b in boxes):
        raise TypeError("E must be a Box or a BoxUnion")
    for b in boxes:
        if not domain.encloses(b):
            raise ValueError(f"set member {b!r} is not contained in the domain {domain!r}")

    centers = grid_centers(domain, grid_per_axis)
    cell_volume = domain.volume() / grid_per_axis**domain.dim
    ind = as_indicator(E)
    measure_e = float(np.count_nonzero(ind(centers))) * cell_volume
    fc = np.asarray(_apply_map(f, centers), dtype=float)
    measure_pre = float(np.count_nonzero(ind(fc))) * cell_volume
    return abs(measure_e - measure_pre)
