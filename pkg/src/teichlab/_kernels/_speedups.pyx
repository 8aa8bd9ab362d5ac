# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython twin of teichlab._kernels._pure.  Same functions, same results."""

from libc.math cimport floor, fabs, sqrt, exp, INFINITY

import numpy as np
cimport numpy as cnp  # noqa: F401  (kept for the int64 buffer types)


cdef inline int _reduce(double* u, double* v) except -1:
    cdef double ax = u[0], ay = u[1], bx = v[0], by = v[1]
    cdef double nu = ax * ax + ay * ay
    cdef double nv = bx * bx + by * by
    cdef double mu, tx, ty
    cdef int it
    if nu > nv:
        tx = ax; ty = ay
        ax = bx; ay = by
        bx = tx; by = ty
        mu = nu; nu = nv; nv = mu
    for it in range(10000):
        mu = floor((ax * bx + ay * by) / nu + 0.5)
        bx -= mu * ax
        by -= mu * ay
        nv = bx * bx + by * by
        if nv >= nu:
            u[0] = ax; u[1] = ay
            v[0] = bx; v[1] = by
            return 0
        tx = ax; ty = ay
        ax = bx; ay = by
        bx = tx; by = ty
        mu = nu; nu = nv; nv = mu
    raise ArithmeticError("lattice reduction did not converge (degenerate basis?)")


cdef double _shortest_maxnorm(double ax, double ay, double bx, double by):
    cdef double u[2]
    cdef double v[2]
    cdef double best = INFINITY
    cdef double m
    cdef int a, b
    u[0] = ax; u[1] = ay
    v[0] = bx; v[1] = by
    _reduce(u, v)
    for a in range(-2, 3):
        for b in range(-2, 3):
            if a == 0 and b == 0:
                continue
            m = fabs(a * u[0] + b * v[0])
            if fabs(a * u[1] + b * v[1]) > m:
                m = fabs(a * u[1] + b * v[1])
            if m < best:
                best = m
    return best


def lattice_shortest_euclidean(double ax, double ay, double bx, double by):
    cdef double u[2]
    cdef double v[2]
    u[0] = ax; u[1] = ay
    v[0] = bx; v[1] = by
    _reduce(u, v)
    # matches the pure kernel bit-for-bit (IEEE sqrt is correctly rounded)
    return sqrt(u[0] * u[0] + u[1] * u[1])


def lattice_shortest_maxnorm(double ax, double ay, double bx, double by):
    return _shortest_maxnorm(ax, ay, bx, by)


def geodesic_miss_count(double ax, double ay, double bx, double by,
                        int n_steps, double t, double eps):
    cdef int misses = 0
    cdef int l
    cdef double e
    for l in range(1, n_steps + 1):
        e = exp(l * t)
        if _shortest_maxnorm(ax * e, ay / e, bx * e, by / e) < eps:
            misses += 1
    return misses


def iet_inverse_layers(gammas, shifts, start, int n_layers):
    cdef cnp.int64_t[::1] g = np.ascontiguousarray(gammas, dtype=np.int64)
    cdef cnp.int64_t[::1] sh = np.ascontiguousarray(shifts, dtype=np.int64)
    cdef cnp.int64_t[::1] cur = np.ascontiguousarray(start, dtype=np.int64)
    cdef int d = g.shape[0]
    cdef int m = cur.shape[0]
    cdef cnp.ndarray out = np.empty((n_layers, m), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] o = out
    cdef int j, i, k
    cdef cnp.int64_t y
    for i in range(m):
        o[0, i] = cur[i]
    for j in range(1, n_layers):
        for i in range(m):
            y = o[j - 1, i]
            k = 0
            while g[k] <= y:
                k += 1
            o[j, i] = y + sh[k]
    return out.tolist()
