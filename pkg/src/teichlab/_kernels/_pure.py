"""Pure-Python implementations of the hot kernels.

These are the reference semantics; ``teichlab._kernels._speedups`` is a
Cython twin of this module and must agree bit-for-bit on shared inputs
(see tests/test_kernels.py and benchmarks/bench_kernels.py).
"""

from __future__ import annotations

import math

_SIN60 = math.sqrt(3.0) / 2.0


def _gauss_reduce(ax: float, ay: float, bx: float, by: float):
    """Lagrange-Gauss reduction of a rank-2 lattice basis (Euclidean norm)."""
    nu = ax * ax + ay * ay
    nv = bx * bx + by * by
    if nu > nv:
        ax, ay, bx, by = bx, by, ax, ay
        nu, nv = nv, nu
    for _ in range(10000):
        mu = math.floor((ax * bx + ay * by) / nu + 0.5)
        bx -= mu * ax
        by -= mu * ay
        nv = bx * bx + by * by
        if nv >= nu:
            return ax, ay, bx, by
        ax, ay, bx, by = bx, by, ax, ay
        nu, nv = nv, nu
    raise ArithmeticError("lattice reduction did not converge (degenerate basis?)")


def lattice_shortest_euclidean(ax: float, ay: float, bx: float, by: float) -> float:
    """Euclidean length of a shortest nonzero vector of the lattice Z*u + Z*v."""
    ax, ay, _, _ = _gauss_reduce(ax, ay, bx, by)
    # sqrt(x*x + y*y) rather than hypot: IEEE sqrt is correctly rounded, so the
    # compiled twin produces bit-identical values
    return math.sqrt(ax * ax + ay * ay)


def lattice_shortest_maxnorm(ax: float, ay: float, bx: float, by: float) -> float:
    """Max-norm (sup-norm) length of a shortest nonzero lattice vector.

    After Gauss reduction any max-norm minimizer a*u + b*v has
    max(|a|,|b|) <= sqrt(2)/sin(60deg) < 2, so scanning |a|,|b| <= 2 is exact.
    """
    ax, ay, bx, by = _gauss_reduce(ax, ay, bx, by)
    best = math.inf
    for a in range(-2, 3):
        for b in range(-2, 3):
            if a == 0 and b == 0:
                continue
            m = max(abs(a * ax + b * bx), abs(a * ay + b * by))
            if m < best:
                best = m
    return best


def geodesic_miss_count(ax: float, ay: float, bx: float, by: float,
                        n_steps: int, t: float, eps: float) -> int:
    """Count steps l in 1..n_steps where diag(e^{lt}, e^{-lt}) applied to the
    lattice spanned by u=(ax,ay), v=(bx,by) has max-norm systole < eps."""
    misses = 0
    for l in range(1, n_steps + 1):
        e = math.exp(l * t)
        s = lattice_shortest_maxnorm(ax * e, ay / e, bx * e, by / e)
        if s < eps:
            misses += 1
    return misses


def iet_inverse_layers(gammas, shifts, start, n_layers):
    """Generate inverse-orbit layers of an integer-scaled IET.

    gammas: increasing right endpoints of the image intervals (last = total).
    shifts: per image interval k, the translation x -> x + shifts[k] taking a
        point of image interval k back to its preimage.
    start:  layer-0 points.
    Returns a list of n_layers lists; layer j holds the j-fold inverse images.
    """
    d = len(gammas)
    layers = [list(start)]
    cur = list(start)
    for _ in range(1, n_layers):
        nxt = []
        for y in cur:
            k = 0
            while gammas[k] <= y:
                k += 1
            nxt.append(y + shifts[k])
        layers.append(nxt)
        cur = nxt
    return layers
