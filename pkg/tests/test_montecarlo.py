import math

import numpy as np
import pytest

from ergolab import (
    Box,
    BoxUnion,
    density_ratio,
    estimate_volume_mc,
    invariance_by_integrals,
    preimage_measure_discrepancy,
)
from ergolab.systems import contraction_map, doubling_map, rotation_map

UNIT_SQUARE = Box.from_bounds([(0, 1), (0, 1)])
SYMMETRIC_SQUARE = Box.from_bounds([(-1, 1), (-1, 1)])
UNIT_INTERVAL = Box.from_bounds([(0, 1)])


def unit_disk(pts):
    return np.sum(np.asarray(pts) ** 2, axis=-1) < 1.0


def test_full_indicator_is_exact_with_zero_error():
    est = estimate_volume_mc(lambda p: np.ones(len(p), dtype=bool), UNIT_SQUARE, 1000, seed=0)
    assert est.estimate == 1.0
    assert est.standard_error == 0.0


def test_half_space_has_measure_half():
    est = estimate_volume_mc(lambda p: p[:, 0] < 0.5, UNIT_SQUARE, 10**5, seed=1)
    assert abs(est.estimate - 0.5) <= 4 * est.standard_error


def test_unit_disk_area_matches_pi():
    est = estimate_volume_mc(unit_disk, SYMMETRIC_SQUARE, 10**5, seed=2)
    assert abs(est.estimate - math.pi) <= 4 * est.standard_error
    assert 0.0 <= est.estimate <= SYMMETRIC_SQUARE.volume()


def test_estimates_are_reproducible_bit_for_bit():
    a = estimate_volume_mc(unit_disk, SYMMETRIC_SQUARE, 50_000, seed=7)
    b = estimate_volume_mc(unit_disk, SYMMETRIC_SQUARE, 50_000, seed=7)
    assert a == b


def test_worker_count_does_not_change_the_estimate():
    serial = estimate_volume_mc(unit_disk, SYMMETRIC_SQUARE, 200_000, seed=7, workers=1)
    threaded = estimate_volume_mc(unit_disk, SYMMETRIC_SQUARE, 200_000, seed=7, workers=4)
    assert serial == threaded


def test_error_shrinks_with_sample_size_in_the_median():
    m = 4000
    errors_small, errors_big = [], []
    for seed in range(11):
        small = estimate_volume_mc(unit_disk, SYMMETRIC_SQUARE, m, seed=seed)
        big = estimate_volume_mc(unit_disk, SYMMETRIC_SQUARE, 4 * m, seed=seed)
        errors_small.append(abs(small.estimate - math.pi))
        errors_big.append(abs(big.estimate - math.pi))
    assert np.median(errors_big) <= np.median(errors_small)


def test_zero_samples_rejected():
    with pytest.raises(ValueError):
        estimate_volume_mc(unit_disk, SYMMETRIC_SQUARE, 0, seed=0)


# ---------------------------------------------------------------- density_ratio

def test_density_ratio_interior_point():
    inside_box = Box.from_bounds([(0, 1), (0, 1)])
    assert density_ratio([0.5, 0.5], inside_box, eps=0.1, n=2000, seed=0) == 1.0


def test_density_ratio_half_plane_boundary():
    half = lambda pts: pts[:, 1] < 0.0  # noqa: E731
    n = 20_000
    ratio = density_ratio([0.0, 0.0], half, eps=0.25, n=n, seed=1)
    assert abs(ratio - 0.5) <= 4 * math.sqrt(0.25 / n)


def test_density_ratio_disjoint_ball():
    far_box = Box.from_bounds([(10, 11), (10, 11)])
    assert density_ratio([0.0, 0.0], far_box, eps=0.5, n=500, seed=2) == 0.0


def test_density_ratio_validates_radius():
    with pytest.raises(ValueError):
        density_ratio([0.0], lambda p: p[:, 0] > 0, eps=-1.0, n=10, seed=0)


# ---------------------------------------------------------------- invariance

def test_identity_map_has_exactly_zero_discrepancy():
    identity = lambda x: x  # noqa: E731
    phis = [lambda x: np.cos(2 * np.pi * x[:, 0]), lambda x: x[:, 0] ** 2]
    report = invariance_by_integrals(identity, phis, UNIT_INTERVAL, 5000, seed=0)
    for record in report.per_test_function:
        assert record.discrepancy == 0.0
        assert record.combined_mc_error == 0.0
    assert report.verdict


def test_doubling_map_passes_on_oscillating_test_function():
    # both integrals vanish analytically: cos(2 pi x) and cos(4 pi x) average to 0
    phi = lambda x: np.cos(2 * np.pi * x[:, 0])  # noqa: E731
    report = invariance_by_integrals(doubling_map(), [phi], UNIT_INTERVAL, 200_000, seed=3)
    rec = report.per_test_function[0]
    assert abs(rec.lhs_integral) < 0.01 and abs(rec.rhs_integral) < 0.01
    assert report.verdict


def test_contraction_fails_with_the_exact_integral_gap():
    # oracle: int x dx = 1/2 and int x/2 dx = 1/4 on [0, 1)
    phi = lambda x: x[:, 0]  # noqa: E731
    report = invariance_by_integrals(contraction_map(), [phi], UNIT_INTERVAL, 100_000, seed=4)
    rec = report.per_test_function[0]
    assert rec.lhs_integral == pytest.approx(0.5, abs=0.01)
    assert rec.rhs_integral == pytest.approx(0.25, abs=0.01)
    assert not report.verdict


def test_invariance_rejects_empty_test_function_list():
    with pytest.raises(ValueError):
        invariance_by_integrals(lambda x: x, [], UNIT_INTERVAL, 100, seed=0)


def test_invariance_rejects_maps_leaving_the_domain():
    escape = lambda x: x + 2.0  # noqa: E731
    with pytest.raises(ValueError, match="leaves the domain"):
        invariance_by_integrals(escape, [lambda x: x[:, 0]], UNIT_INTERVAL, 100, seed=0)


# ---------------------------------------------------------------- preimage

def test_preimage_discrepancy_identity_is_zero():
    e = Box.from_bounds([(0.2, 0.4)])
    assert preimage_measure_discrepancy(lambda x: x, e, UNIT_INTERVAL, 1000) == 0.0


def test_preimage_discrepancy_rotation_small():
    # oracle: the preimage of [0, 0.1) under x + 0.3 mod 1 is [0.7, 0.8), same length
    e = Box.from_bounds([(0.0, 0.1)])
    disc = preimage_measure_discrepancy(rotation_map(0.3), e, UNIT_INTERVAL, 10_000)
    assert disc <= 2.0 / 10_000


def test_preimage_discrepancy_detects_squaring_map():
    # oracle: preimage of [0, 0.25) under x^2 is [0, 0.5): lengths differ by 0.25
    e = Box.from_bounds([(0.0, 0.25)])
    square = lambda x: x**2  # noqa: E731
    disc = preimage_measure_discrepancy(square, e, UNIT_INTERVAL, 10_000)
    assert disc == pytest.approx(0.25, abs=1e-3)


def test_preimage_discrepancy_bound_scales_with_grid():
    e = Box.from_bounds([(0.0, 0.1)])
    for f in (rotation_map(0.3), doubling_map()):
        for grid in (100, 200, 400):
            assert preimage_measure_discrepancy(f, e, UNIT_INTERVAL, grid) <= 2.0 / grid


def test_preimage_discrepancy_accepts_box_unions():
    e = BoxUnion([Box.from_bounds([(0.0, 0.1)]), Box.from_bounds([(0.5, 0.6)])])
    disc = preimage_measure_discrepancy(rotation_map(0.3), e, UNIT_INTERVAL, 5000)
    assert disc <= 2.0 / 5000


def test_preimage_discrepancy_validation():
    outside = Box.from_bounds([(0.5, 1.5)])
    with pytest.raises(ValueError, match="not contained"):
        preimage_measure_discrepancy(lambda x: x, outside, UNIT_INTERVAL, 100)
    inside = Box.from_bounds([(0.2, 0.3)])
    with pytest.raises(ValueError, match="grid_per_axis"):
        preimage_measure_discrepancy(lambda x: x, inside, UNIT_INTERVAL, 1)
