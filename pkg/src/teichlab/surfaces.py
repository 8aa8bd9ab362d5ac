"""Translation surfaces as planar polygons with translation gluings.

Provides the SL(2,R) matrices used throughout (geodesic, rotation, horocycle,
opposite horocycle), the linear action on surfaces, saddle-connection
enumeration by breadth-first unfolding with trace verification, the max-norm
systole and the compact sets K_eps.

Geometry here is double precision; exact arithmetic lives in teichlab.iet.
"""

from __future__ import annotations

import cmath
import math
import os
from dataclasses import dataclass
from typing import Optional, Sequence

from . import _kernels
from .errors import BudgetExceeded, DegenerateGeometry

DEFAULT_NODE_BUDGET = 1_000_000
_HOLONOMY_QUANTUM = 1e-9
_VERTEX_SNAP = 1e-10
_EDGE_SNAP = 1e-12


def node_budget() -> int:
    return int(os.environ.get("TEICH_LAB_BUDGET", DEFAULT_NODE_BUDGET))


# ----------------------------------------------------------------------------
# SL(2,R)
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class SL2Matrix:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.a, self.b, self.c, self.d)):
            raise ValueError("matrix entries must be finite")
        det = self.a * self.d - self.b * self.c
        if abs(det - 1.0) > 1e-12:
            raise ValueError(f"determinant {det} too far from 1")

    @classmethod
    def identity(cls) -> "SL2Matrix":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def geodesic(cls, t: float) -> "SL2Matrix":
        return cls(math.exp(t), 0.0, 0.0, math.exp(-t))

    @classmethod
    def rotation(cls, theta: float) -> "SL2Matrix":
        return cls(math.cos(theta), math.sin(theta), -math.sin(theta), math.cos(theta))

    @classmethod
    def horocycle(cls, s: float) -> "SL2Matrix":
        return cls(1.0, s, 0.0, 1.0)

    @classmethod
    def opposite_horocycle(cls, s: float) -> "SL2Matrix":
        return cls(1.0, 0.0, s, 1.0)

    def __matmul__(self, other: "SL2Matrix") -> "SL2Matrix":
        return SL2Matrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def apply(self, z: complex) -> complex:
        """Act on C = R^2 with (x, y) as (Re, Im)."""
        return complex(self.a * z.real + self.b * z.imag, self.c * z.real + self.d * z.imag)

    def inverse(self) -> "SL2Matrix":
        return SL2Matrix(self.d, -self.b, -self.c, self.a)

    def max_entry_distance(self, other: "SL2Matrix") -> float:
        return max(abs(self.a - other.a), abs(self.b - other.b),
                   abs(self.c - other.c), abs(self.d - other.d))


_MATRIX_KINDS = {
    "geodesic": SL2Matrix.geodesic,
    "rotation": SL2Matrix.rotation,
    "horocycle": SL2Matrix.horocycle,
    "opposite_horocycle": SL2Matrix.opposite_horocycle,
}


def make_matrix(kind: str, param: float) -> SL2Matrix:
    """g_t, r_theta, h_s or the opposite horocycle, by name."""
    if kind not in _MATRIX_KINDS:
        raise ValueError(f"unknown matrix kind {kind!r}; choose from {sorted(_MATRIX_KINDS)}")
    if not math.isfinite(param):
        raise ValueError("parameter must be finite")
    return _MATRIX_KINDS[kind](param)


def maxnorm(z: complex) -> float:
    return max(abs(z.real), abs(z.imag))


def _cross(u: complex, v: complex) -> float:
    return u.real * v.imag - u.imag * v.real


# ----------------------------------------------------------------------------
# Surfaces
# ----------------------------------------------------------------------------

Corner = tuple[int, int]  # (polygon index, vertex index)
Edge = tuple[int, int]    # (polygon index, edge index: vertex e -> e+1)


@dataclass(frozen=True)
class ConePoint:
    corners: tuple[Corner, ...]
    angle: float          # total cone angle
    order: int            # angle = 2*pi*(order+1)


@dataclass(frozen=True)
class SaddleConnection:
    holonomy: complex
    path: tuple[Edge, ...]   # edges crossed, in order, for audit
    source: int              # cone point class index

    def maxnorm(self) -> float:
        return maxnorm(self.holonomy)


class TranslationSurface:
    """Polygons glued along parallel opposite edges by translations."""

    def __init__(self, polygons: Sequence[Sequence[complex]],
                 gluings: Sequence[tuple[Edge, Edge]], normalized: bool = False):
        self.polygons = tuple(tuple(complex(v) for v in poly) for poly in polygons)
        self.gluings = tuple((tuple(e1), tuple(e2)) for e1, e2 in gluings)
        self.normalized = normalized
        self._validate()
        self._partner = {}
        for e1, e2 in self.gluings:
            self._partner[e1] = e2
            self._partner[e2] = e1
        self.cone_points = self._cone_points()
        self.genus = self._genus()

    # -- construction checks -------------------------------------------------

    def _validate(self):
        if not self.polygons:
            raise ValueError("need at least one polygon")
        for poly in self.polygons:
            if len(poly) < 3:
                raise ValueError("polygons need at least 3 vertices")
            if _shoelace(poly) <= 0:
                raise ValueError("polygons must be simple and counterclockwise")
        seen = set()
        for e1, e2 in self.gluings:
            for e in (e1, e2):
                if e in seen:
                    raise ValueError(f"edge {e} glued twice")
                seen.add(e)
            v1 = self.edge_vector(*e1)
            v2 = self.edge_vector(*e2)
            scale = max(abs(v1), abs(v2))
            if abs(v1 + v2) > 1e-9 * scale:
                raise ValueError(f"glued edges {e1}, {e2} are not opposite translates")
        expected = sum(len(p) for p in self.polygons)
        if len(seen) != expected:
            raise ValueError("every edge must be glued exactly once")

    def edge_vector(self, p: int, e: int) -> complex:
        poly = self.polygons[p]
        return poly[(e + 1) % len(poly)] - poly[e]

    def partner(self, edge: Edge) -> Edge:
        return self._partner[edge]

    @property
    def area(self) -> float:
        return sum(_shoelace(p) for p in self.polygons) / 2.0

    def _cone_points(self) -> tuple[ConePoint, ...]:
        remaining = {(p, v) for p, poly in enumerate(self.polygons) for v in range(len(poly))}
        classes = []
        while remaining:
            start = min(remaining)
            cycle = []
            corner = start
            while True:
                cycle.append(corner)
                remaining.discard(corner)
                p, v = corner
                q, f = self._partner[(p, v)]
                corner = (q, (f + 1) % len(self.polygons[q]))
                if corner == start:
                    break
                if corner not in remaining:
                    raise ValueError("inconsistent gluing combinatorics at a vertex")
            angle = sum(self._interior_angle(c) for c in cycle)
            turns = angle / (2 * math.pi)
            order = round(turns) - 1
            if abs(turns - round(turns)) > 1e-6 or order < 0:
                raise ValueError(f"cone angle {angle} is not a positive multiple of 2*pi")
            classes.append(ConePoint(corners=tuple(cycle), angle=angle, order=order))
        return tuple(classes)

    def _interior_angle(self, corner: Corner) -> float:
        p, v = corner
        poly = self.polygons[p]
        n = len(poly)
        u = poly[v] - poly[v - 1]
        w = poly[(v + 1) % n] - poly[v]
        turn = math.atan2(_cross(u, w), (u.real * w.real + u.imag * w.imag))
        return math.pi - turn

    def _genus(self) -> int:
        total_order = sum(c.order for c in self.cone_points)
        if total_order % 2:
            raise ValueError("odd total cone order; not a closed translation surface")
        g = (total_order + 2) // 2
        # Euler characteristic cross-check
        v = len(self.cone_points)
        e = len(self.gluings)
        f = len(self.polygons)
        if v - e + f != 2 - 2 * g:
            raise ValueError("Gauss-Bonnet and Euler characteristic disagree")
        return g

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "polygons": [[[z.real, z.imag] for z in poly] for poly in self.polygons],
            "gluings": [[list(e1), list(e2)] for e1, e2 in self.gluings],
        }

    @classmethod
    def from_json(cls, data: dict) -> "TranslationSurface":
        polys = [[complex(x, y) for x, y in poly] for poly in data["polygons"]]
        glu = [(tuple(e1), tuple(e2)) for e1, e2 in data["gluings"]]
        return cls(polys, glu)

    # -- the SL(2,R) action ----------------------------------------------------

    def act(self, m: SL2Matrix) -> "TranslationSurface":
        area_before = self.area
        polys = [[m.apply(z) for z in poly] for poly in self.polygons]
        for p in polys:
            if not all(math.isfinite(z.real) and math.isfinite(z.imag) for z in p):
                raise DegenerateGeometry("coordinates left double-precision range")
            if _shoelace(p) / 2.0 < 1e-15 * area_before:
                raise DegenerateGeometry("polygon collapsed under the linear map")
        return TranslationSurface(polys, self.gluings, normalized=self.normalized)

    # -- lattice shortcut for torus-like surfaces -------------------------------

    def lattice_basis(self) -> Optional[tuple[complex, complex]]:
        """Basis of the holonomy lattice when the surface is a parallelogram
        torus (one 4-gon, opposite sides glued); None otherwise."""
        cached = getattr(self, "_lattice_basis", False)
        if cached is not False:
            return cached
        basis = None
        if len(self.polygons) == 1 and len(self.polygons[0]) == 4:
            pairs = {frozenset((e1[1], e2[1])) for e1, e2 in self.gluings}
            if pairs == {frozenset((0, 2)), frozenset((1, 3))}:
                basis = (self.edge_vector(0, 0), self.edge_vector(0, 1))
        self._lattice_basis = basis
        return basis

    # -- saddle connections ------------------------------------------------------

    def saddle_connections(self, bound: float, budget: Optional[int] = None) -> list[SaddleConnection]:
        """All saddle connections with max-norm holonomy <= bound.

        Candidate holonomies come from breadth-first unfolding along edge
        gluings from each cone point; each candidate is then verified by
        tracing the straight segment through the surface, which also yields
        the edge-crossing path and rejects vectors passing through a
        singularity.  Results are deduplicated up to orientation reversal and
        sorted by (|v|, arg v).
        """
        if bound <= 0:
            raise ValueError("bound must be positive")
        budget = node_budget() if budget is None else budget
        out: dict[tuple[int, int], SaddleConnection] = {}
        spent = 0
        for src, cone in enumerate(self.cone_points):
            candidates, spent = self._unfold_candidates(cone, bound, budget, spent)
            for w in candidates:
                key = _quantize(_canonical_sign(w))
                if key in out:
                    continue
                path = self._trace(cone, w)
                if path is not None:
                    out[key] = SaddleConnection(holonomy=_canonical_sign(w), path=path, source=src)
        return sorted(out.values(), key=lambda sc: (abs(sc.holonomy), cmath.phase(sc.holonomy)))

    def _feature_size(self) -> float:
        """Min distance from a vertex to a non-incident edge (or other vertex).

        Lower bound for how little a crossing chord can advance a straight
        segment outside of corner clusters; cached.
        """
        cached = getattr(self, "_feature", None)
        if cached is not None:
            return cached
        best = math.inf
        for poly in self.polygons:
            n = len(poly)
            for i, z in enumerate(poly):
                for e in range(n):
                    if e == i or (e + 1) % n == i:
                        continue
                    a, b = poly[e], poly[(e + 1) % n]
                    best = min(best, _point_segment_distance(z, a, b))
        self._feature = best
        return best

    def _min_corner_angle(self) -> float:
        return min(self._interior_angle((p, v))
                   for p, poly in enumerate(self.polygons) for v in range(len(poly)))

    def _unfold_depth_limit(self, bound: float) -> int:
        """Combinatorial length budget for straight chains of length <= sqrt(2)*bound.

        Between visits to corner clusters a chord advances at least half the
        feature size; winding through a cone of angle Theta costs at most
        Theta/theta_min crossings.  Keeping this tight matters: surfaces of
        higher genus develop densely, so the reachable placement shell grows
        polynomially with the depth allowance.
        """
        adv = self._feature_size() / 2
        theta_min = self._min_corner_angle()
        max_angle = max(c.angle for c in self.cone_points)
        wind = math.ceil(max_angle / theta_min) + 1
        return int((math.sqrt(2) * bound / adv + 2) * wind)

    def _unfold_candidates(self, cone: ConePoint, bound: float, budget: int,
                           spent: int) -> tuple[list[complex], int]:
        pad = bound * 1e-9 + 1e-12
        depth_limit = self._unfold_depth_limit(bound)
        seen: set[tuple[int, tuple[int, int]]] = set()
        queue: list[tuple[int, complex, int]] = []
        for (p, v) in cone.corners:
            off = -self.polygons[p][v]
            key = (p, _quantize(off))
            if key not in seen:
                seen.add(key)
                queue.append((p, off, 0))
        candidates: dict[tuple[int, int], complex] = {}
        head = 0
        while head < len(queue):
            p, off, depth = queue[head]
            head += 1
            spent += 1
            if spent > budget:
                raise BudgetExceeded(f"unfolding exceeded node budget {budget}")
            poly = self.polygons[p]
            for v, z in enumerate(poly):
                w = z + off
                if 0 < maxnorm(w) <= bound + pad:
                    candidates.setdefault(_quantize(w), w)
            if depth >= depth_limit:
                continue
            for e in range(len(poly)):
                a = poly[e] + off
                q, f = self._partner[(p, e)]
                # partner edge endpoint f+1 lands on a
                off2 = a - self.polygons[q][(f + 1) % len(self.polygons[q])]
                key = (q, _quantize(off2))
                if key in seen:
                    continue
                if not self._bbox_hits_ball(q, off2, bound + pad):
                    continue
                seen.add(key)
                queue.append((q, off2, depth + 1))
        return list(candidates.values()), spent

    def _bbox_hits_ball(self, p: int, off: complex, r: float) -> bool:
        xs = [z.real + off.real for z in self.polygons[p]]
        ys = [z.imag + off.imag for z in self.polygons[p]]
        return (min(xs) <= r and max(xs) >= -r and min(ys) <= r and max(ys) >= -r)

    def _trace(self, cone: ConePoint, w: complex) -> Optional[tuple[Edge, ...]]:
        for corner in cone.corners:
            res = self._trace_from_corner(corner, w)
            if res is not None:
                return res
        return None

    def _trace_from_corner(self, corner: Corner, w: complex) -> Optional[tuple[Edge, ...]]:
        p, v = corner
        poly = self.polygons[p]
        n = len(poly)
        u_out = poly[(v + 1) % n] - poly[v]
        scale = abs(w)
        # segment along the outgoing edge
        if abs(_cross(u_out, w)) <= _EDGE_SNAP * abs(u_out) * scale and \
                (u_out.real * w.real + u_out.imag * w.imag) > 0:
            if abs(abs(u_out) - scale) <= 1e-9 * max(1.0, scale):
                return ((p, v),)
            return None
        phi = self._interior_angle(corner)
        delta = (cmath.phase(w) - cmath.phase(u_out)) % (2 * math.pi)
        if not (1e-12 < delta < phi - 1e-12):
            return None
        return self._trace_interior(p, -poly[v], w)

    def _trace_interior(self, p: int, off: complex, w: complex) -> Optional[tuple[Edge, ...]]:
        """Follow the segment t*w, t in (0,1], across glued polygons."""
        t_cur = 0.0
        path: list[Edge] = []
        budget = node_budget()
        for _ in range(budget):
            poly = self.polygons[p]
            n = len(poly)
            best = None  # (t, edge, exit point, vertex_hit)
            for e in range(n):
                a = poly[e] + off
                b = poly[(e + 1) % n] + off
                denom = _cross(w, a - b)
                if abs(denom) < _EDGE_SNAP * abs(w) * abs(a - b):
                    continue
                t = _cross(a, a - b) / denom
                uu = _cross(a, w) / -denom
                if t <= t_cur + _EDGE_SNAP or uu < -_EDGE_SNAP or uu > 1 + _EDGE_SNAP:
                    continue
                if best is None or t < best[0]:
                    exit_pt = t * w
                    near_vertex = min(abs(exit_pt - a), abs(exit_pt - b)) <= _VERTEX_SNAP * max(1.0, abs(w))
                    best = (t, e, exit_pt, near_vertex)
            if best is None:
                return None
            t, e, exit_pt, near_vertex = best
            if near_vertex:
                if abs(t - 1.0) <= 1e-9 and abs(exit_pt - w) <= _VERTEX_SNAP * max(1.0, abs(w)):
                    return tuple(path)
                return None  # singularity strictly inside the segment
            if t >= 1.0 - _EDGE_SNAP:
                return None  # endpoint fell mid-edge: not a singularity
            q, f = self._partner[(p, e)]
            a = poly[e] + off
            off = a - self.polygons[q][(f + 1) % len(self.polygons[q])]
            path.append((p, e))
            p = q
            t_cur = t
        raise BudgetExceeded("trace exceeded the crossing budget")

    # -- systole and compact sets -------------------------------------------------

    def min_edge_norm(self, norm: str = "max") -> float:
        vals = []
        for p, poly in enumerate(self.polygons):
            for e in range(len(poly)):
                v = self.edge_vector(p, e)
                vals.append(maxnorm(v) if norm == "max" else abs(v))
        return min(vals)

    def systole(self, norm: str = "max", method: str = "unfold") -> float:
        """Length of the shortest saddle connection.

        norm="max" is the sup-norm reading used by the compact sets K_eps;
        norm="euclidean" is the SO(2)-invariant variant used by height
        functions.  method="lattice" uses exact lattice reduction and is only
        available on parallelogram tori; "auto" picks it when possible.
        """
        if method not in ("unfold", "lattice", "auto"):
            raise ValueError(f"unknown systole method {method!r}")
        basis = self.lattice_basis() if method in ("lattice", "auto") else None
        if method == "lattice" and basis is None:
            raise ValueError("lattice systole requires a parallelogram torus")
        if basis is not None:
            u, v = basis
            if norm == "max":
                return _kernels.lattice_shortest_maxnorm(u.real, u.imag, v.real, v.imag)
            return _kernels.lattice_shortest_euclidean(u.real, u.imag, v.real, v.imag)
        bound = self.min_edge_norm(norm) * (1 + 1e-12)
        scs = self.saddle_connections(bound)
        if norm == "max":
            return min(sc.maxnorm() for sc in scs)
        return min(abs(sc.holonomy) for sc in scs)

    def in_compact_set(self, eps: float, method: str = "unfold") -> bool:
        """Membership in K_eps = {systole >= eps} (max-norm)."""
        return self.systole(norm="max", method=method) >= eps

    def __repr__(self):
        return (f"TranslationSurface(polygons={len(self.polygons)}, genus={self.genus}, "
                f"area={self.area:.6g})")


def _point_segment_distance(z: complex, a: complex, b: complex) -> float:
    ab = b - a
    t = ((z - a).real * ab.real + (z - a).imag * ab.imag) / (abs(ab) ** 2)
    t = min(1.0, max(0.0, t))
    return abs(z - (a + t * ab))


def _shoelace(poly: Sequence[complex]) -> float:
    total = 0.0
    for i, z in enumerate(poly):
        z2 = poly[(i + 1) % len(poly)]
        total += z.real * z2.imag - z2.real * z.imag
    return total


def _quantize(z: complex) -> tuple[int, int]:
    return (round(z.real / _HOLONOMY_QUANTUM), round(z.imag / _HOLONOMY_QUANTUM))


def _canonical_sign(z: complex) -> complex:
    if z.real < -_HOLONOMY_QUANTUM or (abs(z.real) <= _HOLONOMY_QUANTUM and z.imag < 0):
        return -z
    return z


def act(m: SL2Matrix, x: TranslationSurface) -> TranslationSurface:
    return x.act(m)


def systole(x: TranslationSurface, norm: str = "max", method: str = "unfold") -> float:
    return x.systole(norm=norm, method=method)


# ----------------------------------------------------------------------------
# Built-in surfaces
# ----------------------------------------------------------------------------

def square_torus() -> TranslationSurface:
    poly = [0j, 1 + 0j, 1 + 1j, 0 + 1j]
    gluings = [(((0, 0)), ((0, 2))), (((0, 1)), ((0, 3)))]
    return TranslationSurface([poly], gluings, normalized=True)


def regular_octagon() -> TranslationSurface:
    # unit side length, opposite sides glued; one cone point of angle 6*pi
    r = 1.0 / (2 * math.sin(math.pi / 8))
    verts = [r * cmath.exp(1j * (math.pi / 8 + k * math.pi / 4)) for k in range(8)]
    gluings = [((0, k), (0, k + 4)) for k in range(4)]
    return TranslationSurface([verts], gluings)


def double_pentagon() -> TranslationSurface:
    # two centrally symmetric regular pentagons; side i of one glued to side i
    # of the other; one cone point of angle 6*pi, genus 2
    r = 1.0 / (2 * math.sin(math.pi / 5))
    up = [r * cmath.exp(1j * (math.pi / 2 + k * 2 * math.pi / 5)) for k in range(5)]
    down = [-z for z in up]
    gluings = [((0, k), (1, k)) for k in range(5)]
    return TranslationSurface([up, down], gluings)


_BUILDERS = {
    "square_torus": square_torus,
    "regular_octagon": regular_octagon,
    "double_pentagon": double_pentagon,
}


def surface_by_name(name: str) -> TranslationSurface:
    if name not in _BUILDERS:
        raise ValueError(f"unknown surface {name!r}; choose from {sorted(_BUILDERS)}")
    return _BUILDERS[name]()
