"""Concrete Lebesgue measure on axis-aligned boxes.

Boxes are products of closed-open intervals [lo, hi).  The convention makes a
uniform grid of cells partition a box exactly: no point belongs to two cells
and none is lost on a shared face.  Measurable sets appear in two concrete
forms throughout the package: finite disjoint unions of boxes (measured
exactly here) and indicator predicates (measured by Monte Carlo in
:mod:`ergolab.montecarlo`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class Interval:
    """Closed-open interval [lo, hi) on the real line."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValueError(f"interval endpoints must be finite, got [{self.lo}, {self.hi})")
        if self.lo > self.hi:
            raise ValueError(f"interval needs lo <= hi, got [{self.lo}, {self.hi})")

    @property
    def length(self) -> float:
        return self.hi - self.lo


class Box:
    """Product of closed-open intervals in R^d.

    Membership is lo_j <= x_j < hi_j on every axis; the volume is the product
    of the interval lengths (zero if any interval is degenerate).
    """

    def __init__(self, intervals: Sequence[Interval]):
        intervals = tuple(intervals)
        if not intervals:
            raise ValueError("a box needs at least one interval")
        self.intervals = intervals
        self.lows = np.array([iv.lo for iv in intervals], dtype=float)
        self.highs = np.array([iv.hi for iv in intervals], dtype=float)

    @classmethod
    def from_bounds(cls, bounds: Iterable[tuple[float, float]]) -> "Box":
        """Build a box from (lo, hi) pairs, one per axis."""
        return cls([Interval(float(lo), float(hi)) for lo, hi in bounds])

    @property
    def dim(self) -> int:
        return len(self.intervals)

    @property
    def widths(self) -> np.ndarray:
        return self.highs - self.lows

    def volume(self) -> float:
        return float(np.prod(self.widths))

    def contains(self, points):
        """Vectorised membership test.

        ``points`` is a single point of shape (d,) or a batch of shape (m, d);
        returns a bool or a boolean array of shape (m,).
        """
        pts = np.asarray(points, dtype=float)
        scalar = pts.ndim == 1
        if scalar:
            pts = pts[None, :]
        if pts.shape[-1] != self.dim:
            raise ValueError(f"points have dimension {pts.shape[-1]}, box has {self.dim}")
        inside = np.all((pts >= self.lows) & (pts < self.highs), axis=-1)
        return bool(inside[0]) if scalar else inside

    def encloses(self, other: "Box") -> bool:
        """True when ``other`` lies inside this box (as closed-open sets)."""
        return bool(np.all(other.lows >= self.lows) and np.all(other.highs <= self.highs))

    def __repr__(self):
        parts = " x ".join(f"[{iv.lo:g},{iv.hi:g})" for iv in self.intervals)
        return f"Box({parts})"

    def __eq__(self, other):
        if not isinstance(other, Box):
            return NotImplemented
        return self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)


def box_volume(box: Box) -> float:
    """Volume of a box: the product of its interval lengths."""
    return box.volume()


def _positive_volume_overlap(a: Box, b: Box) -> bool:
    # [a,b) ∩ [c,d) has positive length iff max(a,c) < min(b,d), per axis.
    lo = np.maximum(a.lows, b.lows)
    hi = np.minimum(a.highs, b.highs)
    return bool(np.all(lo < hi))


def _check_pairwise_disjoint(boxes: Sequence[Box], what: str):
    dims = {b.dim for b in boxes}
    if len(dims) > 1:
        raise ValueError(f"{what} mixes dimensions {sorted(dims)}")
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            if _positive_volume_overlap(boxes[i], boxes[j]):
                raise ValueError(
                    f"{what} must be pairwise disjoint; "
                    f"{boxes[i]!r} and {boxes[j]!r} overlap with positive volume"
                )


class BoxUnion:
    """Finite union of pairwise-disjoint boxes; measured exactly."""

    def __init__(self, boxes: Sequence[Box]):
        boxes = tuple(boxes)
        if not boxes:
            raise ValueError("a box union needs at least one box")
        _check_pairwise_disjoint(boxes, "box-union members")
        self.boxes = boxes

    @property
    def dim(self) -> int:
        return self.boxes[0].dim

    def measure(self) -> float:
        return float(sum(b.volume() for b in self.boxes))

    def contains(self, points):
        pts = np.asarray(points, dtype=float)
        scalar = pts.ndim == 1
        if scalar:
            pts = pts[None, :]
        inside = np.zeros(pts.shape[0], dtype=bool)
        for b in self.boxes:
            inside |= b.contains(pts)
        return bool(inside[0]) if scalar else inside


class SimpleFunction:
    """Finite combination sum_j alpha_j * chi(A_j) over pairwise-disjoint boxes.

    Disjointness is validated on construction (overlap means a nonempty
    intersection of positive volume).  At any point at most one term is
    active, so evaluation is the sum of coefficients of containing supports.
    """

    def __init__(self, terms: Sequence[tuple[float, Box]]):
        terms = tuple((float(alpha), box) for alpha, box in terms)
        _check_pairwise_disjoint([box for _, box in terms], "simple-function supports")
        self.terms = terms

    @property
    def dim(self) -> int:
        if not self.terms:
            raise ValueError("empty simple function has no dimension")
        return self.terms[0][1].dim

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        scalar = pts.ndim == 1
        if scalar:
            pts = pts[None, :]
        values = np.zeros(pts.shape[0], dtype=float)
        for alpha, box in self.terms:
            values += alpha * box.contains(pts)
        return float(values[0]) if scalar else values


def integrate_simple(s: SimpleFunction) -> float:
    """Integral of a simple function: sum of coefficient times support volume."""
    return float(sum(alpha * box.volume() for alpha, box in s.terms))
