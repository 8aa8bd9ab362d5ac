"""Hot-kernel dispatch: compiled extension when available, pure Python otherwise.

``IMPLEMENTATION`` records which backend won so callers (and the benchmark
script) can report it.  The integer IET kernel additionally falls back to the
pure path per call whenever inputs do not fit comfortably in int64; the pure
path is exact for arbitrary Python integers.
"""

from __future__ import annotations

from . import _pure

try:  # pragma: no cover - depends on the build environment
    from . import _speedups as _impl

    IMPLEMENTATION = "cython"
except ImportError:  # pragma: no cover
    _impl = _pure
    IMPLEMENTATION = "pure"

# Headroom so |y + shift| can never overflow int64 inside the compiled loop.
_INT64_SAFE = 2**62

lattice_shortest_euclidean = _impl.lattice_shortest_euclidean
lattice_shortest_maxnorm = _impl.lattice_shortest_maxnorm
geodesic_miss_count = _impl.geodesic_miss_count


def iet_inverse_layers(gammas, shifts, start, n_layers):
    if _impl is not _pure:
        bound = max(max(abs(v) for v in gammas), max(abs(v) for v in shifts))
        if bound < _INT64_SAFE:
            return _impl.iet_inverse_layers(gammas, shifts, start, n_layers)
    return _pure.iet_inverse_layers(gammas, shifts, start, n_layers)
