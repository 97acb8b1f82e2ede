"""Seeded uniform sampling with worker-independent streams.

All randomness flows through counter-based Philox generators keyed by
``(seed, purpose)``.  Box sampling is organised in fixed-size blocks of
sample indices, one jumped substream per block, so every sample index draws
the same values no matter how a run is partitioned across workers.  Ball and
region sampling use rejection from a bounding box on their own streams; they
are deterministic for a fixed seed because acceptance is a pure filter over a
single stream.
"""

from __future__ import annotations

import numpy as np

from .boxes import Box

BLOCK = 1 << 16
_MASK64 = (1 << 64) - 1

# purpose tags keep independent uses of the same seed on disjoint streams
STREAM_BOX = 0
STREAM_BALL = 1
STREAM_REGION = 2


def philox_generator(seed: int, purpose: int, jumps: int = 0) -> np.random.Generator:
    """Philox stream for (seed, purpose), advanced by ``jumps`` jump units."""
    if seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed}")
    key = np.array([seed & _MASK64, purpose], dtype=np.uint64)
    bitgen = np.random.Philox(key=key)
    if jumps:
        bitgen = bitgen.jumped(jumps)
    return np.random.Generator(bitgen)


def block_ranges(n: int):
    """Yield (block_index, start, stop) covering sample indices [0, n)."""
    for block in range((n + BLOCK - 1) // BLOCK):
        start = block * BLOCK
        yield block, start, min(n, start + BLOCK)


def uniform_in_box_block(box: Box, block: int, count: int, seed: int) -> np.ndarray:
    """First ``count`` samples of block ``block`` for (box, seed); shape (count, d)."""
    if not 0 < count <= BLOCK:
        raise ValueError(f"count must be in [1, {BLOCK}], got {count}")
    rng = philox_generator(seed, STREAM_BOX, jumps=block)
    u = rng.random((count, box.dim))
    return box.lows + u * box.widths


def uniform_in_box(box: Box, n: int, seed: int) -> np.ndarray:
    """``n`` uniform samples in the box, shape (n, d); fixed per (box, seed, index)."""
    if n < 1:
        raise ValueError(f"need n >= 1 samples, got {n}")
    parts = [uniform_in_box_block(box, b, stop - start, seed) for b, start, stop in block_ranges(n)]
    return parts[0] if len(parts) == 1 else np.concatenate(parts, axis=0)


def bounding_box_of_ball(center: np.ndarray, radius: float) -> Box:
    center = np.asarray(center, dtype=float)
    return Box.from_bounds([(c - radius, c + radius) for c in center])


def sample_ball(center, radius: float, n: int, seed: int) -> np.ndarray:
    """Uniform samples from the Euclidean ball B(center, radius) by rejection.

    Rejection from the bounding box keeps a usable acceptance rate for the
    dimensions used here (d <= 6).
    """
    center = np.asarray(center, dtype=float)
    if radius <= 0:
        raise ValueError(f"ball radius must be positive, got {radius}")
    if n < 1:
        raise ValueError(f"need n >= 1 samples, got {n}")
    bbox = bounding_box_of_ball(center, radius)
    rng = philox_generator(seed, STREAM_BALL)
    out = np.empty((n, center.size), dtype=float)
    filled = 0
    batch = max(1024, min(n * 2, 1 << 16))
    while filled < n:
        pts = bbox.lows + rng.random((batch, center.size)) * bbox.widths
        keep = pts[np.sum((pts - center) ** 2, axis=1) < radius**2]
        take = min(n - filled, keep.shape[0])
        out[filled : filled + take] = keep[:take]
        filled += take
    return out


def rejection_sample(indicator, domain: Box, n: int, seed: int, *, empty_guard: int = 10**6):
    """Uniform samples from {x in domain : indicator(x)} by rejection.

    Returns ``(points, total_drawn, total_accepted)`` where the totals cover
    every whole batch drawn, so ``total_accepted / total_drawn`` estimates the
    relative measure of the set from the same stream that produced the points.
    Raises if ``empty_guard`` draws produce no acceptance at all.
    """
    if n < 1:
        raise ValueError(f"need n >= 1 samples, got {n}")
    rng = philox_generator(seed, STREAM_REGION)
    accepted: list[np.ndarray] = []
    total_drawn = 0
    total_accepted = 0
    batch = max(1024, min(4 * n, 1 << 16))
    while total_accepted < n:
        pts = domain.lows + rng.random((batch, domain.dim)) * domain.widths
        keep = pts[np.asarray(indicator(pts), dtype=bool)]
        accepted.append(keep)
        total_drawn += batch
        total_accepted += keep.shape[0]
        if total_accepted == 0 and total_drawn >= empty_guard:
            raise ValueError(
                f"rejection sampling found no point of the target set in "
                f"{total_drawn} draws from {domain!r}; the set looks empty"
            )
    points = np.concatenate(accepted, axis=0)[:n]
    return points, total_drawn, total_accepted
