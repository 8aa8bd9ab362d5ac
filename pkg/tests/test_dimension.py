import math

import pytest

from teichlab.dimension import (CoverLevel, CoverReport, accumulate_cover,
                                estimate_dimension, hausdorff_sum_check,
                                synthetic_cantor_report, synthetic_full_report,
                                synthetic_singleton_report)
from teichlab.dynamics import BadSetMask, DirectionGrid
from teichlab.errors import InconsistentLevels, InsufficientLevels


def test_report_validation():
    good = [CoverLevel(1, 0.5, 3), CoverLevel(2, 0.25, 5)]
    CoverReport(levels=tuple(good), t=1.0)
    with pytest.raises(InconsistentLevels):
        CoverReport(levels=(good[1], good[0]), t=1.0)
    with pytest.raises(InconsistentLevels):
        CoverReport(levels=(CoverLevel(1, 0.5, 3), CoverLevel(2, 0.5, 3)), t=1.0)
    with pytest.raises(ValueError):
        CoverReport(levels=tuple(good), t=1.0, convention="area")


def test_accumulate_cover_counts():
    t = 0.9
    masks = []
    for n, bad in [(1, (0,)), (2, (1, 3)), (3, (0, 1, 2))]:
        grid = DirectionGrid(level=n, step=t)
        masks.append(BadSetMask(grid=grid, semantics="Z-set", bad=bad))
    rep = accumulate_cover(masks, t=t)
    assert [lv.count for lv in rep.levels] == [1, 2, 3]
    with pytest.raises(InconsistentLevels):
        accumulate_cover(masks, t=0.5)


def test_all_bad_masks_count_everything():
    t = 1.0
    masks = []
    for n in (1, 2, 3):
        grid = DirectionGrid(level=n, step=t)
        masks.append(BadSetMask(grid=grid, semantics="Z-set",
                                bad=tuple(range(grid.count))))
    rep = accumulate_cover(masks, t=t)
    assert all(lv.count == DirectionGrid(level=lv.n, step=t).count
               for lv in rep.levels)


def test_cantor_calibration():
    est = estimate_dimension(synthetic_cantor_report(12))
    assert est.dim_upper == pytest.approx(math.log(2) / math.log(3), abs=0.05)


def test_full_and_singleton_calibration():
    est = estimate_dimension(synthetic_full_report(12))
    assert est.dim_upper == pytest.approx(1.0, abs=0.02)
    est0 = estimate_dimension(synthetic_singleton_report(12))
    assert est0.dim_upper == pytest.approx(0.0, abs=0.02)


def test_insufficient_levels():
    rep = CoverReport(levels=(CoverLevel(1, 0.5, 2), CoverLevel(2, 0.25, 4)), t=1.0)
    with pytest.raises(InsufficientLevels):
        estimate_dimension(rep)


def test_empty_cover_reports_dimension_zero():
    levels = tuple(CoverLevel(n, math.exp(-2 * n), 0) for n in range(1, 8))
    est = estimate_dimension(CoverReport(levels=levels, t=1.0))
    assert est.empty_cover and est.dim_upper == 0.0


def test_scale_equivariance():
    base = synthetic_cantor_report(12)
    scaled = CoverReport(levels=tuple(CoverLevel(lv.n, lv.width, 7 * lv.count)
                                      for lv in base.levels), t=base.t)
    e1, e2 = estimate_dimension(base), estimate_dimension(scaled)
    assert e1.slope == pytest.approx(e2.slope, abs=1e-9)


def test_appending_levels_of_a_nested_family_never_raises_dimension():
    # counts c_n = 2^n for n <= 8 then frozen at 2^8: dimension estimate drops
    t = math.log(3) / 2
    grow = [CoverLevel(n, math.exp(-2 * t * n), 2 ** min(n, 8)) for n in range(1, 14)]
    est_short = estimate_dimension(CoverReport(levels=tuple(grow[:8]), t=t))
    est_long = estimate_dimension(CoverReport(levels=tuple(grow), t=t))
    assert est_long.dim_upper <= est_short.dim_upper + 1e-9


def test_hausdorff_sums_full_set_measure():
    rep = synthetic_full_report(10, t=1.0)
    sums = hausdorff_sum_check(rep, beta=1.0)
    for (_, v), lv in zip(sums, rep.levels):
        # count = ceil(2/width), so the sum sandwiches the measure of [-1,1]
        assert 2.0 <= v < 2.0 + lv.width


def test_hausdorff_sums_split_at_dimension():
    rep = synthetic_cantor_report(16)
    dim = math.log(2) / math.log(3)
    above = hausdorff_sum_check(rep, beta=min(1.0, dim + 0.1))
    below = hausdorff_sum_check(rep, beta=dim - 0.1)
    assert above[-1][1] < above[0][1] * 0.2         # tail decays toward 0
    assert below[-1][1] > below[0][1] * 5           # tail diverges upward
    with pytest.raises(ValueError):
        hausdorff_sum_check(rep, beta=1.5)


def test_sum_check_consistent_with_estimator():
    rep = synthetic_cantor_report(14)
    est = estimate_dimension(rep)
    sums = hausdorff_sum_check(rep, beta=min(1.0, est.dim_upper + 0.05))
    assert sums[-1][1] < sums[0][1]
