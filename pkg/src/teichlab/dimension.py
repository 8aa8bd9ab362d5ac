"""Covering-based upper bounds on box/Hausdorff dimension.

Counts of bad intervals at geometrically shrinking scales are fitted to an
exponential growth law; the fitted rate divided by 2t is an upper-bound
estimate for the box dimension, which dominates the Hausdorff dimension of
the corresponding limsup set.  Lower bounds are out of scope and never
claimed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dynamics import BadSetMask
from .errors import InconsistentLevels, InsufficientLevels


@dataclass(frozen=True)
class CoverLevel:
    n: int
    width: float   # interval width per the convention flag
    count: int


@dataclass(frozen=True)
class CoverReport:
    levels: tuple[CoverLevel, ...]
    t: float
    convention: str = "diameter"  # width field holds diameters (2 e^{-2tn}) or radii

    def __post_init__(self):
        if self.convention not in ("diameter", "radius"):
            raise ValueError("convention must be 'diameter' or 'radius'")
        ns = [lv.n for lv in self.levels]
        if ns != sorted(ns) or len(set(ns)) != len(ns):
            raise InconsistentLevels("levels must be strictly increasing")
        widths = [lv.width for lv in self.levels]
        if any(w2 >= w1 for w1, w2 in zip(widths, widths[1:])):
            raise InconsistentLevels("widths must be strictly decreasing")
        if any(lv.count < 0 for lv in self.levels):
            raise InconsistentLevels("counts must be nonnegative")

    def diameters(self) -> list[float]:
        factor = 1.0 if self.convention == "diameter" else 2.0
        return [factor * lv.width for lv in self.levels]

    def to_rows(self) -> list[tuple[int, float, int]]:
        return [(lv.n, lv.width, lv.count) for lv in self.levels]


def accumulate_cover(masks: Sequence[BadSetMask], t: float) -> CoverReport:
    """Count bad intervals per level from a family of masks."""
    if not masks:
        raise InconsistentLevels("no masks given")
    levels = []
    for m in masks:
        if abs(m.grid.step - t) > 1e-12:
            raise InconsistentLevels(f"mask at level {m.level} has step {m.grid.step} != {t}")
        levels.append(CoverLevel(n=m.level, width=m.grid.width, count=m.count_bad))
    return CoverReport(levels=tuple(levels), t=t, convention="diameter")


@dataclass(frozen=True)
class DimensionEstimate:
    slope: float       # fitted growth rate of log(count) per unit n
    dim_upper: float   # slope / (2t)
    residuals: tuple[float, ...]
    levels_used: tuple[int, ...]
    dropped_empty: tuple[int, ...] = field(default=())
    empty_cover: bool = False


def estimate_dimension(report: CoverReport, fit_fraction: float = 0.5) -> DimensionEstimate:
    """Least-squares fit of log(count) against n over the finest levels.

    By default only the top fit_fraction of levels enters the fit; coarse
    levels are routinely contaminated by transients.  Zero-count levels are
    dropped (and recorded).  A family that is empty at every level covers the
    set with nothing, so its box-dimension upper bound is reported as 0.
    """
    if len(report.levels) < 3:
        raise InsufficientLevels("need at least 3 cover levels")
    usable = [lv for lv in report.levels if lv.count > 0]
    dropped = tuple(lv.n for lv in report.levels if lv.count == 0)
    if not usable:
        return DimensionEstimate(slope=0.0, dim_upper=0.0, residuals=(),
                                 levels_used=(), dropped_empty=dropped, empty_cover=True)
    if len(usable) < 3:
        raise InsufficientLevels("need at least 3 levels with nonzero counts")
    start = min(len(usable) - 3, math.floor(len(usable) * (1 - fit_fraction)))
    chosen = usable[start:]
    xs = np.array([lv.n for lv in chosen], dtype=float)
    ys = np.array([math.log(lv.count) for lv in chosen])
    slope, intercept = np.polyfit(xs, ys, 1)
    residuals = tuple(float(y - (slope * x + intercept)) for x, y in zip(xs, ys))
    return DimensionEstimate(slope=float(slope), dim_upper=float(slope / (2 * report.t)),
                             residuals=residuals, levels_used=tuple(int(x) for x in xs),
                             dropped_empty=dropped)


def hausdorff_sum_check(report: CoverReport, beta: float) -> list[tuple[int, float]]:
    """Per-level sums count * diam^beta.

    A tail decreasing to zero signals H^beta = 0 along this resolution family;
    beta = 1 on a full-measure family reproduces the measure of the ambient
    interval at every level.
    """
    if not 0 < beta <= 1:
        raise ValueError("beta must lie in (0, 1]")
    out = []
    for lv, diam in zip(report.levels, report.diameters()):
        out.append((lv.n, lv.count * diam ** beta))
    return out


def synthetic_cantor_report(levels: int, t: Optional[float] = None) -> CoverReport:
    """Middle-thirds construction mapped onto the e^{-2tn} scale family.

    With 2t = ln 3 the level-n width is exactly 3^{-n}, and the covering
    counts 2^n give slope ln 2 per level, i.e. dim log2/log3.
    """
    t = math.log(3) / 2 if t is None else t
    rows = [CoverLevel(n=n, width=math.exp(-2 * t * n), count=2 ** n)
            for n in range(1, levels + 1)]
    return CoverReport(levels=tuple(rows), t=t, convention="diameter")


def synthetic_full_report(levels: int, t: float = 1.0, span: float = 2.0) -> CoverReport:
    rows = [CoverLevel(n=n, width=2 * math.exp(-2 * t * n),
                       count=math.ceil(span / (2 * math.exp(-2 * t * n))))
            for n in range(1, levels + 1)]
    return CoverReport(levels=tuple(rows), t=t, convention="diameter")


def synthetic_singleton_report(levels: int, t: float = 1.0) -> CoverReport:
    rows = [CoverLevel(n=n, width=2 * math.exp(-2 * t * n), count=1)
            for n in range(1, levels + 1)]
    return CoverReport(levels=tuple(rows), t=t, convention="diameter")
