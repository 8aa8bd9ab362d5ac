"""Suspension of an IET into a translation surface and its verification.

The chart realizing the local product structure is the classical suspension
polygon: edge vectors zeta_i = (lam_i, b_i) laid out along the top in letter
order and along the bottom in image order, with matching edges glued.  The
rectangle heights dual to b are h_i = Q(e_i, b); the suspension area is
sum lam_i h_i = Q(lam, b), so the positivity hypothesis Q(lam,b) > 0 is
exactly positivity of area.  Shearing the surface by h_sigma equals
re-suspending (lam + sigma*b, b), which verify_local_product checks through
matched saddle-connection holonomies.

The vertical-flow tracer provides the independent first-return oracle used
to validate suspensions against exact IET evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetExceeded, InvalidSuspension, SingularTrajectory
from .iet import IET
from .permutations import Permutation, build_q_form
from .surfaces import SaddleConnection, SL2Matrix, TranslationSurface

_VERTEX_SNAP = 1e-10
_STEP_SNAP = 1e-12
_MAX_CROSSINGS = 100_000


def suspension_heights(perm: Permutation, b: Sequence[float]) -> list[float]:
    """Zippered-rectangle heights h_i = Q(e_i, b)."""
    q = build_q_form(perm)
    d = perm.d
    return [sum(q.matrix[i][j] * float(b[j]) for j in range(d)) for i in range(d)]


@dataclass(frozen=True)
class SuspensionData:
    base: IET
    b: tuple[float, ...]
    heights: tuple[float, ...] = field(init=False)

    def __post_init__(self):
        b = tuple(float(v) for v in self.b)
        object.__setattr__(self, "b", b)
        d = self.base.d
        if len(b) != d:
            raise InvalidSuspension(f"b has length {len(b)}, expected {d}")
        top = 0.0
        for i in range(d - 1):
            top += b[i]
            if top <= 0:
                raise InvalidSuspension(f"top partial sum through letter {i + 1} is {top} <= 0")
        inv = self.base.perm.inverse_permutation()
        bot = 0.0
        for k in range(1, d):
            bot += b[inv(k) - 1]
            if bot >= 0:
                raise InvalidSuspension(f"bottom partial sum through slot {k} is {bot} >= 0")
        heights = suspension_heights(self.base.perm, b)
        if any(h <= 0 for h in heights):
            raise InvalidSuspension(f"nonpositive rectangle height in {heights}")
        area = sum(float(l) * h for l, h in zip(self.base.lengths, heights))
        if area <= 0:
            raise InvalidSuspension(f"Q(lambda, b) = {area} <= 0")
        object.__setattr__(self, "heights", tuple(heights))

    @property
    def area(self) -> float:
        return sum(float(l) * h for l, h in zip(self.base.lengths, self.heights))

    def max_shear(self) -> float:
        """Largest |sigma| keeping lam + sigma*b strictly positive.

        The existence of some positive bound is all the local product
        structure asserts; we report the concrete value instead of guessing
        a universal epsilon.  (Q(lam + sigma*b, b) = Q(lam, b) since Q is
        alternating, so positivity of the pairing is shear-invariant.)
        """
        out = math.inf
        for l, bv in zip(self.base.lengths, self.b):
            if bv != 0:
                out = min(out, float(l) / abs(bv))
        return out

    def to_json(self) -> dict:
        return {"iet": self.base.to_json(), "b": list(self.b)}

    @classmethod
    def from_json(cls, data: dict) -> "SuspensionData":
        return cls(base=IET.from_json(data["iet"]), b=tuple(data["b"]))


def suspension_polygon(lengths: Sequence[float], perm: Permutation,
                  b: Sequence[float]) -> TranslationSurface:
    """Single-polygon suspension with edge vectors zeta_i = lengths_i + i*b_i."""
    d = perm.d
    zeta = [complex(float(lengths[i]), float(b[i])) for i in range(d)]
    inv = perm.inverse_permutation()
    bottom = [0j]
    for k in range(1, d + 1):
        bottom.append(bottom[-1] + zeta[inv(k) - 1])
    top = [0j]
    for i in range(1, d + 1):
        top.append(top[-1] + zeta[i - 1])
    if abs(top[-1] - bottom[-1]) > 1e-9 * abs(top[-1]):
        raise InvalidSuspension("top and bottom paths do not close up")
    # counterclockwise boundary: bottom left-to-right, then top right-to-left
    verts = bottom[:-1] + [top[d]] + list(reversed(top[1:d]))
    gluings = []
    for i in range(1, d + 1):
        bottom_edge = perm(i) - 1
        top_edge = 2 * d - i
        gluings.append(((0, bottom_edge), (0, top_edge)))
    return TranslationSurface([verts], gluings)


def suspend(s: SuspensionData) -> TranslationSurface:
    return suspension_polygon([float(v) for v in s.base.lengths], s.base.perm, s.b)


def verify_local_product(s: SuspensionData, shears: Sequence[float],
                         sc_bound: Optional[float] = None) -> float:
    """Compare h_sigma . suspend(lam, b) with suspend(lam + sigma*b, b).

    Both sides are built independently and matched through their sorted
    saddle-connection holonomies; returns the maximum discrepancy.
    """
    lam = [float(v) for v in s.base.lengths]
    limit = s.max_shear()
    for sigma in shears:
        if abs(sigma) >= limit:
            raise ValueError(f"shear {sigma} exceeds the positivity bound {limit}")
    surf = suspend(s)
    if sc_bound is None:
        sc_bound = 1.5 * surf.min_edge_norm()
    worst = 0.0
    for sigma in shears:
        sheared = surf.act(SL2Matrix.horocycle(sigma))
        rebuilt = suspension_polygon([l + sigma * bv for l, bv in zip(lam, s.b)],
                                s.base.perm, s.b)
        a = sheared.saddle_connections(sc_bound)
        c = rebuilt.saddle_connections(sc_bound)
        if len(a) != len(c):
            raise AssertionError(
                f"saddle connection counts differ at shear {sigma}: {len(a)} vs {len(c)}")
        for sc1, sc2 in zip(a, c):
            worst = max(worst, abs(sc1.holonomy - sc2.holonomy))
    return worst


# ----------------------------------------------------------------------------
# Vertical flow tracing / first-return oracle
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Transversal:
    polygon: int
    start: complex
    end: complex

    @property
    def length(self) -> float:
        return abs(self.end - self.start)

    def point(self, u: float) -> complex:
        return self.start + (u / self.length) * (self.end - self.start)


def standard_transversal(s: SuspensionData) -> Transversal:
    """Horizontal chord from (0,0) to (|lam|, 0) inside the suspension polygon.

    Requires sum(b) = 0: the sign conditions then place the top path strictly
    above and the bottom path strictly below the chord, so the chord is a
    closed transversal of the vertical flow whose first return is the IET.
    """
    if abs(sum(s.b)) > 1e-12:
        raise InvalidSuspension(
            "the horizontal transversal needs sum(b) = 0; rebalance b or supply "
            "a custom transversal")
    return Transversal(polygon=0, start=0j, end=complex(float(s.base.total), 0.0))


@dataclass(frozen=True)
class FirstReturnTable:
    entries: tuple[tuple[float, float, float], ...]  # (u_in, u_out, return_time)
    breakpoints: tuple[float, ...]
    translations: tuple[float, ...]
    resampled: int

    def translation_at(self, u: float) -> float:
        idx = int(np.searchsorted(np.array(self.breakpoints), u, side="right"))
        return self.translations[idx]


def vertical_first_return(surface: TranslationSurface, tr: Transversal,
                          u: float) -> tuple[float, float]:
    """Flow the point tr.point(u) vertically until it next hits tr.

    Returns (u_out, return_time).  Raises SingularTrajectory when the orbit
    passes within the vertex snap distance of a cone point.
    """
    if not 0 <= u <= tr.length:
        raise ValueError("sample parameter outside the transversal")
    z = tr.point(u)
    p = tr.polygon
    elapsed = 0.0
    t_dir = tr.end - tr.start
    for _ in range(_MAX_CROSSINGS):
        poly = surface.polygons[p]
        n = len(poly)
        scale = max(abs(v) for v in poly)
        exit_tau = None
        exit_edge = None
        exit_point = None
        for e in range(n):
            a, bpt = poly[e], poly[(e + 1) % n]
            ex, ey = (bpt - a).real, (bpt - a).imag
            if abs(ex) < _STEP_SNAP * scale:
                continue  # vertical edge: the upward ray cannot cross transversally
            uu = (z.real - a.real) / ex
            if uu < -_STEP_SNAP or uu > 1 + _STEP_SNAP:
                continue
            tau = (a.imag + uu * ey) - z.imag
            if tau <= _STEP_SNAP * max(1.0, scale):
                continue
            if exit_tau is None or tau < exit_tau:
                exit_tau = tau
                exit_edge = e
                exit_point = complex(z.real, z.imag + tau)
        if exit_tau is None:
            raise BudgetExceeded("vertical ray found no exit (degenerate polygon?)")
        if p == tr.polygon and abs(t_dir.real) > 0:
            uu = (z.real - tr.start.real) / t_dir.real
            tau_t = (tr.start.imag + uu * t_dir.imag) - z.imag
            if 0 <= uu <= 1 and _STEP_SNAP * max(1.0, scale) < tau_t <= exit_tau:
                if min(uu, 1 - uu) * tr.length < _VERTEX_SNAP * max(1.0, scale):
                    raise SingularTrajectory("returned at a transversal endpoint")
                return uu * tr.length, elapsed + tau_t
        a = surface.polygons[p][exit_edge]
        bpt = surface.polygons[p][(exit_edge + 1) % n]
        if min(abs(exit_point - a), abs(exit_point - bpt)) < _VERTEX_SNAP * max(1.0, scale):
            raise SingularTrajectory(f"hit a cone point after time {elapsed + exit_tau}")
        q, f = surface.partner((p, exit_edge))
        shift = surface.polygons[q][f] - bpt  # gluing translation (B -> A')
        z = exit_point + shift
        p = q
        elapsed += exit_tau
    raise BudgetExceeded("vertical trace exceeded the crossing budget")


def first_return_oracle(surface: TranslationSurface, tr: Transversal, samples: int,
                        rng: Optional[np.random.Generator] = None,
                        retry_budget: int = 50) -> FirstReturnTable:
    """Empirical first-return map of the vertical flow on tr.

    Samples are uniform on the transversal; samples hitting a singularity are
    redrawn up to retry_budget times in total, then the error propagates.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    entries = []
    resampled = 0
    want = samples
    while len(entries) < want:
        u = float(rng.uniform(0, tr.length))
        try:
            u_out, elapsed = vertical_first_return(surface, tr, u)
        except SingularTrajectory:
            resampled += 1
            if resampled > retry_budget:
                raise
            continue
        entries.append((u, u_out, elapsed))
    entries.sort()
    breakpoints = []
    translations = []
    for u, u_out, _ in entries:
        tr_val = u_out - u
        if not translations or abs(tr_val - translations[-1]) > 1e-7:
            translations.append(tr_val)
            breakpoints.append(u)
    return FirstReturnTable(entries=tuple(entries), breakpoints=tuple(breakpoints[1:]),
                            translations=tuple(translations), resampled=resampled)


def compare_first_return(table: FirstReturnTable, iet: IET) -> float:
    """Max deviation of the empirical return map from exact IET evaluation."""
    worst = 0.0
    for u, u_out, _ in table.entries:
        exact = iet.evaluate(Fraction(u))
        worst = max(worst, abs(u_out - float(exact)))
    return worst


# ----------------------------------------------------------------------------
# Short-interval saddle connections (the divergence mechanism)
# ----------------------------------------------------------------------------

def short_interval_saddle_connection(s: SuspensionData, n: int,
                                     verify: bool = True) -> SaddleConnection:
    """Saddle connection over the shortest interval of the depth-n partition.

    The vertical strip over the shortest interval I_n develops, over n return
    times, onto a rectangle of width eps_n that is free of singularities; each
    of its vertical sides meets one (the first singular hit of the endpoint
    orbits), and the segment joining those two points is a saddle connection
    with |Re v| = eps_n and |Im v| at most the n-step return time plus the top
    vertex offset.  Applying g_{log(n/sqrt(eps))} with eps = n*eps_n shrinks it
    below a constant multiple of sqrt(eps).
    """
    if n < 1:
        raise ValueError("n >= 1 required")
    if abs(sum(s.b)) > 1e-12:
        raise InvalidSuspension("the vertical-strip construction needs sum(b) = 0")
    report = s.base.partition_report(n)
    if report.epsilon_n == 0:
        raise InvalidSuspension("partition collapsed (exact collision); no short interval")
    cuts = list(report.cut_points)
    total = s.base.total
    gaps = [(b - a, a, b) for a, b in zip(cuts, cuts[1:])]
    gaps.append((total - cuts[-1], cuts[-1], total))
    _, left, right = min(gaps, key=lambda g: g[0])

    def singular_height(point: Fraction) -> float:
        if point == total:
            point = Fraction(0)
        beta_set = {b: j for j, b in enumerate(s.base.betas[:-1])}
        y = 0.0
        cur = point
        for _ in range(n + 1):
            if cur in beta_set:
                j = beta_set[cur]
                return y + sum(s.b[:j])
            i = s.base.interval_index(cur)
            y += s.heights[i - 1]
            cur = s.base.evaluate(cur)
        raise AssertionError("endpoint of a D_n interval must hit a discontinuity within n steps")

    y_left = singular_height(left)
    y_right = singular_height(right)
    holonomy = complex(float(right - left), y_right - y_left)
    path: tuple = ()
    if verify:
        surf = suspend(s)
        found = None
        for cone in surf.cone_points:
            found = surf._trace(cone, holonomy)
            if found is None:
                found = surf._trace(cone, -holonomy)
            if found is not None:
                break
        if found is None:
            raise SingularTrajectory(
                f"constructed vector {holonomy} failed geometric verification")
        path = found
    return SaddleConnection(holonomy=holonomy, path=path, source=0)
