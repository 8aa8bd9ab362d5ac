"""Orbit statistics along g_t r_theta and g_t h_s.

Birkhoff averages (continuous and discrete), recurrence masks on direction
space (the Z sets), deviation masks (the F_i sets), the independence
diagnostic for their intersections, and the correlation-decay test behind
effective unipotent invariance.

Direction grids follow the center-sampling convention: one sample point per
partition interval represents the interval.  The transfer of membership from
the center to the whole interval costs an explicit epsilon margin, which the
hierarchical cover sweep applies through its relaxed candidate rule and which
tests apply as a tolerance.

The boundary convention for recurrence masks is strict: an interval is bad
when the visit fraction is strictly below 1 - delta (equivalently the miss
count strictly exceeds delta*N), so delta = 0 marks only directions that
actually miss the compact set.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import _kernels
from .errors import BudgetExceeded, QuadratureUnstable
from .surfaces import SL2Matrix, TranslationSurface

logger = logging.getLogger("teichlab")

_SYSTOLE_CLAMP = 1e-8
_GRID_ENUMERATION_LIMIT = 4_000_000


# ----------------------------------------------------------------------------
# Observables
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class ObservableF:
    """Observable with the Lipschitz + sup Sobolev-type norm.

    When ``systole_form`` is given, the observable factors through the
    max-norm systole; torus-like surfaces then use the exact lattice kernel
    instead of building transformed surfaces node by node.
    """

    evaluator: Callable[[TranslationSurface], float]
    lip_constant: float
    sup_norm: float
    systole_form: Optional[Callable[[float], float]] = None

    @property
    def sobolev(self) -> float:
        return self.lip_constant + self.sup_norm

    def __call__(self, x: TranslationSurface) -> float:
        return self.evaluator(x)

    @classmethod
    def from_systole(cls, form: Callable[[float], float], lip_constant: float,
                     sup_norm: float) -> "ObservableF":
        return cls(evaluator=lambda x: form(_safe_systole(x)),
                   lip_constant=lip_constant, sup_norm=sup_norm, systole_form=form)


def capped_systole_observable() -> ObservableF:
    """f = min(1, systole), bounded by 1.

    The max-norm systole of an area-1 torus can slightly exceed 1, and a
    shear h_s moves it multiplicatively by (1+|s|); 1.5 is a safe Lipschitz
    constant for matrix displacements below ~0.3.
    """
    return ObservableF.from_systole(lambda s: min(1.0, s), lip_constant=1.5, sup_norm=1.0)


def bump_observable(eps: float, width: float) -> ObservableF:
    """Piecewise-linear bump of the systole, supported in K_eps (compact)."""
    if eps <= 0 or width <= 0:
        raise ValueError("eps and width must be positive")

    def form(s: float) -> float:
        return max(0.0, min(1.0, (s - eps) / width))

    return ObservableF.from_systole(form, lip_constant=1.0 / width, sup_norm=1.0)


def _safe_systole(x: TranslationSurface, method: str = "auto") -> float:
    """Max-norm systole, clamped below against unfolding blowups in cusps."""
    try:
        return max(_SYSTOLE_CLAMP, x.systole(norm="max", method=method))
    except BudgetExceeded:
        logger.warning("systole unfolding budget exceeded; clamping to %g", _SYSTOLE_CLAMP)
        return _SYSTOLE_CLAMP


# ----------------------------------------------------------------------------
# Direction grids and masks
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class DirectionGrid:
    """Partition of [lo, hi) into half-open intervals of radius e^{-2*level*step}.

    Interval data is computed on demand; grids at deep levels are far too
    large to materialize.
    """

    level: int
    step: float
    lo: float = -1.0
    hi: float = 1.0
    radius: float = field(init=False)
    width: float = field(init=False)
    count: int = field(init=False)

    def __post_init__(self):
        radius = math.exp(-2.0 * self.level * self.step)
        object.__setattr__(self, "radius", radius)
        object.__setattr__(self, "width", 2.0 * radius)
        count = max(1, math.ceil((self.hi - self.lo) / self.width - 1e-12))
        object.__setattr__(self, "count", count)

    @property
    def last_clipped(self) -> bool:
        return self.lo + self.count * self.width > self.hi + 1e-12 * self.width

    def bounds(self, k: int) -> tuple[float, float]:
        a = self.lo + k * self.width
        return a, min(self.hi, a + self.width)

    def center(self, k: int) -> float:
        a, b = self.bounds(k)
        return 0.5 * (a + b)

    def index_of(self, s: float) -> int:
        k = int((s - self.lo) / self.width)
        return min(max(k, 0), self.count - 1)


@dataclass(frozen=True)
class BadSetMask:
    """Sparse bad-interval mask over a DirectionGrid."""

    grid: DirectionGrid
    semantics: str  # "Z-set" | "B-set" | "F_i-set"
    bad: tuple[int, ...]
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.bad) > self.grid.count:
            raise ValueError("more bad bits than intervals")

    @property
    def level(self) -> int:
        return self.grid.level

    @property
    def count_bad(self) -> int:
        return len(self.bad)

    def bad_regions(self) -> list[tuple[float, float]]:
        """Merged union of the bad intervals."""
        out: list[tuple[float, float]] = []
        for k in self.bad:
            a, b = self.grid.bounds(k)
            if out and a <= out[-1][1] + 1e-15:
                out[-1] = (out[-1][0], max(out[-1][1], b))
            else:
                out.append((a, b))
        return out

    def bitstring(self, limit: int = 65536) -> str:
        if self.grid.count > limit:
            raise ValueError(f"grid too large ({self.grid.count}) for a dense bit-string")
        bits = ["0"] * self.grid.count
        for k in self.bad:
            bits[k] = "1"
        return "".join(bits)

    def to_json(self) -> dict:
        out = {
            "level": self.grid.level,
            "step": self.grid.step,
            "semantics": self.semantics,
            "interval_count": self.grid.count,
            "interval_width": self.grid.width,
            "meta": self.meta,
        }
        if self.grid.count <= 65536:
            out["bits"] = self.bitstring()
        else:
            out["bad_indices"] = list(self.bad)
        return out


# ----------------------------------------------------------------------------
# Single-orbit kernels
# ----------------------------------------------------------------------------

def _basepoint_matrix(coord: float, flow: str) -> SL2Matrix:
    if flow == "horocycle":
        return SL2Matrix.horocycle(coord)
    if flow == "rotation":
        return SL2Matrix.rotation(coord)
    raise ValueError("flow must be 'horocycle' or 'rotation'")


def recurrence_miss_count(x: TranslationSurface, coord: float, n_steps: int, t: float,
                          eps: float, flow: str = "horocycle",
                          method: str = "auto") -> int:
    """#{1 <= l <= n_steps : g_{l t} m(coord) x outside K_eps}."""
    m = _basepoint_matrix(coord, flow)
    basis = x.lattice_basis() if method in ("auto", "lattice") else None
    if basis is not None:
        u, v = m.apply(basis[0]), m.apply(basis[1])
        return _kernels.geodesic_miss_count(u.real, u.imag, v.real, v.imag,
                                            n_steps, t, eps)
    if method == "lattice":
        raise ValueError("lattice method requires a parallelogram torus")
    y0 = x.act(m)
    misses = 0
    for l in range(1, n_steps + 1):
        if _safe_systole(y0.act(SL2Matrix.geodesic(l * t)), method="unfold") < eps:
            misses += 1
    return misses


def recurrence_mask(x: TranslationSurface, grid: DirectionGrid, eps: float,
                    n_steps: int, t: float, delta: float,
                    flow: str = "horocycle", method: str = "auto") -> BadSetMask:
    """Z-set mask: intervals whose center misses K_eps more than delta*n times.

    Strict inequality; delta in [0,1].  For grids too large to enumerate use
    non_recurrent_cover, which prunes hierarchically.
    """
    if not 0 <= delta <= 1:
        raise ValueError("delta must lie in [0,1]")
    if grid.count > _GRID_ENUMERATION_LIMIT:
        raise ValueError(
            f"grid has {grid.count} intervals; use non_recurrent_cover for deep levels")
    bad = []
    for k in range(grid.count):
        misses = recurrence_miss_count(x, grid.center(k), n_steps, t, eps, flow, method)
        if misses > delta * n_steps:
            bad.append(k)
    return BadSetMask(grid=grid, semantics="Z-set", bad=tuple(bad),
                      meta={"eps": eps, "n_steps": n_steps, "t": t, "delta": delta,
                            "flow": flow})


def _miss_counter(x: TranslationSurface, flow: str,
                  method: str) -> Callable[[float, int, float, float], int]:
    """(coord, n_steps, t, eps) -> miss count, with the torus fast path
    resolved once instead of per call."""
    basis = x.lattice_basis() if method in ("auto", "lattice") else None
    if basis is not None:
        (ux, uy), (vx, vy) = ((basis[0].real, basis[0].imag),
                              (basis[1].real, basis[1].imag))
        count = _kernels.geodesic_miss_count
        if flow == "horocycle":
            def counter(coord, n_steps, t, eps):
                return count(ux + coord * uy, uy, vx + coord * vy, vy, n_steps, t, eps)
        elif flow == "rotation":
            def counter(coord, n_steps, t, eps):
                c, s = math.cos(coord), math.sin(coord)
                return count(c * ux + s * uy, -s * ux + c * uy,
                             c * vx + s * vy, -s * vx + c * vy, n_steps, t, eps)
        else:
            raise ValueError("flow must be 'horocycle' or 'rotation'")
        return counter
    if method == "lattice":
        raise ValueError("lattice method requires a parallelogram torus")

    def counter(coord, n_steps, t, eps):
        return recurrence_miss_count(x, coord, n_steps, t, eps, flow, "unfold")

    return counter


def _relaxed_miss_count(counter, coord: float, j: int, t: float, eps: float) -> int:
    """Miss count over steps 1..j-1 at the center of a level-j interval,
    relaxed so that every miss of every descendant center at those steps is
    also counted here.

    A descendant center at any level n > j sits within sum_{i>=j} e^{-2ti} <=
    e^{-2tj}/(1 - e^{-2t}) of this center, so the shear separating the two
    orbits at step l is at most m * e^{-2t(j-l)} with m = 1/(1-e^{-2t}), and a
    shear sigma distorts the max-norm systole by a factor at most 1+|sigma|.
    Stopping at step j-1 keeps every relaxation factor below 1 + m*e^{-2t},
    which is what makes the candidate sets thin; the final step is instead
    absorbed into the pruning threshold.
    """
    m = 1.0 / (1.0 - math.exp(-2.0 * t))
    total = 0
    bulk = j - 2
    if bulk > 0:
        total += counter(coord, bulk, t, (1.0 + m * math.exp(-4.0 * t)) * eps)
    if j >= 2:
        total += counter(coord, 1, (j - 1) * t, (1.0 + m * math.exp(-2.0 * t)) * eps)
    return total


def non_recurrent_cover(x: TranslationSurface, eps: float, t: float, delta: float,
                        n_levels: int, flow: str = "horocycle", method: str = "auto",
                        slack: float = 0.0) -> list[BadSetMask]:
    """Z-set masks for levels 1..n_levels via hierarchical refinement.

    Only children of candidate intervals are examined.  An interval bad at
    level n misses more than delta*n times among steps 1..n, of which at most
    n-j+1 fall beyond step j-1; the rest transfer to the relaxed count of
    every ancestor at level j, which therefore strictly exceeds
    delta*j - (1-delta)*(n - j) - 1.  Keeping intervals whose relaxed count
    exceeds delta*j - (1-delta)*(n_levels - j) - 1 - slack consequently never
    prunes a bad interval at any level up to n_levels.  The reported masks
    themselves use the strict unrelaxed rule.
    """
    if n_levels < 1:
        raise ValueError("n_levels >= 1")
    counter = _miss_counter(x, flow, method)
    masks = []
    candidates: Optional[list[int]] = None
    for j in range(1, n_levels + 1):
        grid = DirectionGrid(level=j, step=t)
        lo, width, count = grid.lo, grid.width, grid.count
        if candidates is None:
            scan: Iterable[int] = range(count)
        else:
            prev = DirectionGrid(level=j - 1, step=t)
            scan_set = set()
            for k in candidates:
                a, b = prev.bounds(k)
                c_lo = max(0, int((a - lo) / width) - 1)
                c_hi = min(count - 1, int((b - lo) / width) + 1)
                for c in range(c_lo, c_hi + 1):
                    if a <= lo + (c + 0.5) * width < b:
                        scan_set.add(c)
            scan = sorted(scan_set)
        bad = []
        keep = []
        threshold_keep = delta * j - (1 - delta) * (n_levels - j) - 1 - slack
        last = count - 1
        for k in scan:
            s = grid.center(k) if k == last else lo + (k + 0.5) * width
            relaxed = _relaxed_miss_count(counter, s, j, t, eps)
            if relaxed > threshold_keep - 1e-9:
                keep.append(k)
                if counter(s, j, t, eps) > delta * j:
                    bad.append(k)
        masks.append(BadSetMask(grid=grid, semantics="Z-set", bad=tuple(bad),
                                meta={"eps": eps, "n_steps": j, "t": t, "delta": delta,
                                      "flow": flow, "candidates_scanned": len(keep)}))
        candidates = keep
    return masks


# ----------------------------------------------------------------------------
# Birkhoff averages
# ----------------------------------------------------------------------------

def _flow_values(x: TranslationSurface, s: float, times: np.ndarray, f: ObservableF,
                 method: str = "auto") -> np.ndarray:
    """f(g_tau h_s x) over the given times."""
    h = SL2Matrix.horocycle(s)
    basis = x.lattice_basis() if (method in ("auto", "lattice") and f.systole_form) else None
    out = np.empty(len(times))
    if basis is not None:
        u, v = h.apply(basis[0]), h.apply(basis[1])
        for i, tau in enumerate(times):
            g = SL2Matrix.geodesic(float(tau))
            uu, vv = g.apply(u), g.apply(v)
            sys = max(_SYSTOLE_CLAMP,
                      _kernels.lattice_shortest_maxnorm(uu.real, uu.imag, vv.real, vv.imag))
            out[i] = f.systole_form(sys)
        return out
    base = x.act(h)
    for i, tau in enumerate(times):
        out[i] = f(base.act(SL2Matrix.geodesic(float(tau))))
    return out


def birkhoff_average_continuous(x: TranslationSurface, s: float, T: float,
                                f: ObservableF, dt: float, method: str = "auto",
                                return_error: bool = False):
    """(1/T) int_0^T f(g_t h_s x) dt by the trapezoid rule at resolution dt/2.

    The quadrature error estimate is the difference against the dt-resolution
    result on the shared nodes.
    """
    if T <= 0 or dt <= 0:
        raise ValueError("T and dt must be positive")
    if dt > T / 10:
        raise ValueError("dt must be at most T/10")
    n = 2 * max(1, math.ceil(T / dt))
    times = np.linspace(0.0, T, n + 1)
    vals = _flow_values(x, s, times, f, method=method)
    fine = float(np.trapezoid(vals, times) / T)
    coarse = float(np.trapezoid(vals[::2], times[::2]) / T)
    if return_error:
        return fine, abs(fine - coarse)
    return fine


def birkhoff_average_discrete(x: TranslationSurface, s: float, N: int, l: float,
                              f: ObservableF, method: str = "auto") -> float:
    """(1/N) sum_{n=1..N} f(g_{l n} h_s x)."""
    if N < 1 or l <= 0:
        raise ValueError("N >= 1 and l > 0 required")
    times = np.array([l * n for n in range(1, N + 1)])
    vals = _flow_values(x, s, times, f, method=method)
    return float(np.mean(vals))


def window_average(x: TranslationSurface, s: float, i: int, N: float, f: ObservableF,
                   quad_nodes: int = 17, method: str = "auto") -> float:
    """f_i(s) = (1/N) int_{iN}^{(i+1)N} f(g_t h_s x) dt."""
    times = np.linspace(i * N, (i + 1) * N, quad_nodes)
    vals = _flow_values(x, s, times, f, method=method)
    return float(np.trapezoid(vals, times) / N)


# ----------------------------------------------------------------------------
# Deviation masks and their diagnostics
# ----------------------------------------------------------------------------

def deviation_masks(x: TranslationSurface, f: ObservableF, reference_value: float,
                    eps: float, N: float, i_range: Sequence[int],
                    restrict_to_compact: Optional[float] = None,
                    quad_nodes: int = 17, method: str = "auto") -> list[BadSetMask]:
    """F_i(eps) masks: centers with window average above reference_value + eps.

    reference_value is a caller-supplied empirical stand-in for the affine
    average nu(f), which has no closed form here; every mask records that in
    its metadata.  With restrict_to_compact = q_eps, intervals are marked only
    when additionally g_{iN} h_s x lies in K_{q_eps} (the recurrent part F_i^R).
    """
    masks = []
    for i in i_range:
        grid = DirectionGrid(level=i, step=N)
        if grid.count > _GRID_ENUMERATION_LIMIT:
            raise ValueError(f"level {i} grid too large to enumerate")
        bad = []
        for k in range(grid.count):
            s = grid.center(k)
            if restrict_to_compact is not None and recurrence_miss_count(
                    x, s, 1, i * N, restrict_to_compact, method=method):
                continue  # g_{iN} h_s x left K: not part of the recurrent piece
            if window_average(x, s, i, N, f, quad_nodes, method) > reference_value + eps:
                bad.append(k)
        masks.append(BadSetMask(grid=grid, semantics="F_i-set", bad=tuple(bad),
                                meta={"i": i, "N": N, "eps": eps,
                                      "reference_value": reference_value,
                                      "reference_is_empirical": True,
                                      "restricted_to_compact": restrict_to_compact}))
    return masks


def birkhoff_deviation_mask(x: TranslationSurface, f: ObservableF, reference_value: float,
                            eps: float, N: float, M: int, quad_nodes_per_window: int = 17,
                            method: str = "auto") -> BadSetMask:
    """B-set mask at level M: centers with (1/(MN)) int_0^{MN} f > reference + eps."""
    grid = DirectionGrid(level=M, step=N)
    if grid.count > _GRID_ENUMERATION_LIMIT:
        raise ValueError("level-M grid too large to enumerate")
    bad = []
    for k in range(grid.count):
        s = grid.center(k)
        avg = birkhoff_average_continuous(x, s, M * N, f, dt=N / max(2, quad_nodes_per_window),
                                          method=method)
        if avg > reference_value + eps:
            bad.append(k)
    return BadSetMask(grid=grid, semantics="B-set", bad=tuple(bad),
                      meta={"M": M, "N": N, "eps": eps, "reference_value": reference_value,
                            "reference_is_empirical": True})


def _intersect_regions(a: list[tuple[float, float]],
                       b: list[tuple[float, float]]) -> list[tuple[float, float]]:
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if lo < hi:
            out.append((lo, hi))
        if a[i][1] < b[j][1]:
            i += 1
        else:
            j += 1
    return out


def _measure(regions: list[tuple[float, float]]) -> float:
    return sum(hi - lo for lo, hi in regions)


@dataclass(frozen=True)
class IndependenceRow:
    indices: tuple[int, ...]
    intersection_measure: float
    product_bound: float
    satisfied: bool


def independence_diagnostic(masks: Sequence[BadSetMask], tuples: Sequence[Sequence[int]],
                            a: float) -> list[IndependenceRow]:
    """Check nu(bad_{i1} cap ... cap bad_ik) <= a^k for sampled index tuples,
    with nu the probability (normalized Lebesgue) measure on the grid span.

    This is a diagnostic mirroring the near-independence of the F_i sets, not
    a theorem check; violations are reported, not raised.
    """
    regions = [m.bad_regions() for m in masks]
    span = masks[0].grid.hi - masks[0].grid.lo
    rows = []
    for tup in tuples:
        tup = tuple(tup)
        inter = regions[tup[0]]
        for idx in tup[1:]:
            inter = _intersect_regions(inter, regions[idx])
        measure = _measure(inter) / span
        bound = a ** len(tup)
        rows.append(IndependenceRow(indices=tup, intersection_measure=measure,
                                    product_bound=bound, satisfied=measure <= bound + 1e-12))
    return rows


# ----------------------------------------------------------------------------
# Correlation decay
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class CorrelationRow:
    t1: float
    t2: float
    integral: float
    quad_error: float
    reliable: bool


@dataclass(frozen=True)
class CorrelationDecayReport:
    slope: float
    intercept: float
    rows: tuple[CorrelationRow, ...]
    excluded: int
    all_zero: bool = False  # beta=0 and the like: every correlation vanished


def correlation_decay_test(x: TranslationSurface, phi: ObservableF, beta: float,
                           t_pairs: Sequence[tuple[float, float]], quadrature_n: int = 4096,
                           method: str = "auto") -> CorrelationDecayReport:
    """Fit the decay rate of |int f_{t1} f_{t2} ds| against |t1 - t2|.

    f_t(s) = phi(g_t h_s x) - phi(h_beta g_t h_s x).  phi should be compactly
    supported (e.g. bump_observable).  Pairs whose quadrature error estimate
    exceeds a quarter of the integral are excluded from the fit; if fewer than
    three pairs survive, the quadrature is declared unstable.
    """
    nodes = np.linspace(-1.0, 1.0, quadrature_n)
    t_values = sorted({t for pair in t_pairs for t in pair})
    shear = SL2Matrix.horocycle(beta)
    f_cache = {}
    for t in t_values:
        g = SL2Matrix.geodesic(t)
        plain = _profile(x, nodes, g, phi, method)
        sheared = _profile(x, nodes, shear @ g, phi, method)
        f_cache[t] = plain - sheared
    rows = []
    for t1, t2 in t_pairs:
        prod = f_cache[t1] * f_cache[t2]
        integral = float(np.trapezoid(prod, nodes))
        coarse = float(np.trapezoid(prod[::2], nodes[::2]))
        err = abs(integral - coarse)
        reliable = err <= 0.25 * abs(integral) + 1e-12 * phi.sobolev ** 2
        rows.append(CorrelationRow(t1=t1, t2=t2, integral=integral, quad_error=err,
                                   reliable=reliable))
    if all(r.integral == 0 for r in rows):
        return CorrelationDecayReport(slope=0.0, intercept=0.0, rows=tuple(rows),
                                      excluded=len(rows), all_zero=True)
    good = [r for r in rows if r.reliable and r.integral != 0]
    if len(good) < 3:
        raise QuadratureUnstable("fewer than three reliable correlation pairs")
    if len({round(abs(r.t1 - r.t2), 12) for r in good}) < 2:
        raise ValueError("correlation pairs must span at least two distinct time gaps")
    xs = np.array([abs(r.t1 - r.t2) for r in good])
    ys = np.array([math.log(abs(r.integral)) for r in good])
    slope, intercept = np.polyfit(xs, ys, 1)
    return CorrelationDecayReport(slope=float(slope), intercept=float(intercept),
                                  rows=tuple(rows), excluded=len(rows) - len(good))


def _profile(x: TranslationSurface, nodes: np.ndarray, m: SL2Matrix, phi: ObservableF,
             method: str) -> np.ndarray:
    """phi(m h_s x) over the direction nodes."""
    basis = x.lattice_basis() if (method in ("auto", "lattice") and phi.systole_form) else None
    out = np.empty(len(nodes))
    if basis is not None:
        u0, v0 = basis
        for i, s in enumerate(nodes):
            h = SL2Matrix.horocycle(float(s))
            u, v = (m @ h).apply(u0), (m @ h).apply(v0)
            sys = max(_SYSTOLE_CLAMP,
                      _kernels.lattice_shortest_maxnorm(u.real, u.imag, v.real, v.imag))
            out[i] = phi.systole_form(sys)
        return out
    for i, s in enumerate(nodes):
        out[i] = phi(x.act(m @ SL2Matrix.horocycle(float(s))))
    return out
