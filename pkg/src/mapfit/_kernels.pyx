# cython: language_level=3
"""Compiled hot kernels: separable blur, Laplacian stencil, overlap dot
product, simulated-annealing loop, brute-force enumeration.

Same API and semantics as mapfit._kernels_py (the numpy fallback).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt, INFINITY

cnp.import_array()

BACKEND_NAME = "compiled"


def blur_3d(const double[:, :, ::1] values, const double[::1] taps):
    """Separable zero-padded convolution with a symmetric 1D kernel per axis."""
    cdef Py_ssize_t nx = values.shape[0]
    cdef Py_ssize_t ny = values.shape[1]
    cdef Py_ssize_t nz = values.shape[2]
    cdef Py_ssize_t L = taps.shape[0]
    cdef Py_ssize_t radius = L // 2
    cdef cnp.ndarray[double, ndim=3] tmp_arr = np.zeros((nx, ny, nz))
    cdef cnp.ndarray[double, ndim=3] out_arr = np.zeros((nx, ny, nz))
    cdef double[:, :, ::1] tmp = tmp_arr
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t x, y, z, j, s
    cdef double acc

    # axis 0
    for x in range(nx):
        for y in range(ny):
            for z in range(nz):
                acc = 0.0
                for j in range(L):
                    s = x + j - radius
                    if 0 <= s < nx:
                        acc += taps[j] * values[s, y, z]
                tmp[x, y, z] = acc
    # axis 1
    for x in range(nx):
        for y in range(ny):
            for z in range(nz):
                acc = 0.0
                for j in range(L):
                    s = y + j - radius
                    if 0 <= s < ny:
                        acc += taps[j] * tmp[x, s, z]
                out[x, y, z] = acc
    # axis 2
    for x in range(nx):
        for y in range(ny):
            for z in range(nz):
                acc = 0.0
                for j in range(L):
                    s = z + j - radius
                    if 0 <= s < nz:
                        acc += taps[j] * out[x, y, s]
                tmp[x, y, z] = acc
    return tmp_arr


def laplacian_3d(const double[:, :, ::1] values):
    """7-point discrete Laplacian (center -6, face neighbors +1), zero-padded."""
    cdef Py_ssize_t nx = values.shape[0]
    cdef Py_ssize_t ny = values.shape[1]
    cdef Py_ssize_t nz = values.shape[2]
    cdef cnp.ndarray[double, ndim=3] out_arr = np.zeros((nx, ny, nz))
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t x, y, z
    cdef double acc
    for x in range(nx):
        for y in range(ny):
            for z in range(nz):
                acc = -6.0 * values[x, y, z]
                if x > 0:
                    acc += values[x - 1, y, z]
                if x < nx - 1:
                    acc += values[x + 1, y, z]
                if y > 0:
                    acc += values[x, y - 1, z]
                if y < ny - 1:
                    acc += values[x, y + 1, z]
                if z > 0:
                    acc += values[x, y, z - 1]
                if z < nz - 1:
                    acc += values[x, y, z + 1]
                out[x, y, z] = acc
    return out_arr


def overlap_dot(const double[:, :, ::1] a, const double[:, :, ::1] b, const long long[::1] offset):
    """Sum of a[i]*b[i - offset] over the index intersection; 0 if disjoint."""
    cdef Py_ssize_t ox = offset[0], oy = offset[1], oz = offset[2]
    cdef Py_ssize_t lx = max(0, ox), ly = max(0, oy), lz = max(0, oz)
    cdef Py_ssize_t hx = min(a.shape[0], b.shape[0] + ox)
    cdef Py_ssize_t hy = min(a.shape[1], b.shape[1] + oy)
    cdef Py_ssize_t hz = min(a.shape[2], b.shape[2] + oz)
    if hx <= lx or hy <= ly or hz <= lz:
        return 0.0
    cdef double total = 0.0
    cdef Py_ssize_t x, y, z
    for x in range(lx, hx):
        for y in range(ly, hy):
            for z in range(lz, hz):
                total += a[x, y, z] * b[x - ox, y - oy, z - oz]
    return total


cdef double _penalized_objective(const double[:, ::1] Q, const double[::1] b,
                                 Py_ssize_t m, Py_ssize_t N, double w,
                                 const double[::1] y) nogil:
    cdef Py_ssize_t n = Q.shape[0]
    cdef Py_ssize_t i, j, r
    cdef double f = 0.0, row, s
    for i in range(n):
        row = 0.0
        for j in range(n):
            row += Q[i, j] * y[j]
        f += y[i] * row
        f -= b[i] * y[i]
    if w != 0.0:
        for r in range(m):
            s = 0.0
            for j in range(N):
                s += y[r * N + j]
            f += w * (s - 1.0 if s >= 1.0 else 1.0 - s)
    return f


def sa_minimize(const double[:, ::1] Q, const double[::1] b, Py_ssize_t m, Py_ssize_t N,
                const double[::1] y0, double t0, double cooling, double w,
                Py_ssize_t iters, const double[:, ::1] normals, const double[::1] uniforms,
                bint raw_step):
    """Simulated-annealing descent over the unit box with pre-drawn randoms.

    normals has shape (iters, n); uniforms has shape (iters,).  Returns
    (best_y, best_f, accepted_count).
    """
    cdef Py_ssize_t n = Q.shape[0]
    cdef cnp.ndarray[double, ndim=1] y_arr = np.array(y0, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] best_arr = y_arr.copy()
    cdef cnp.ndarray[double, ndim=1] cand_arr = np.zeros(n)
    cdef double[::1] y = y_arr
    cdef double[::1] best = best_arr
    cdef double[::1] cand = cand_arr
    cdef double f = _penalized_objective(Q, b, m, N, w, y)
    cdef double best_f = f
    cdef double temp = t0
    cdef Py_ssize_t accepted = 0
    cdef Py_ssize_t k, i
    cdef double norm, step, scale, v, f_new, delta, z, prob
    cdef bint accept

    for k in range(iters):
        norm = 0.0
        for i in range(n):
            norm += normals[k, i] * normals[k, i]
        norm = sqrt(norm)
        if norm > 0.0:
            step = temp if raw_step else min(temp, 1.0)
            scale = step / norm
            for i in range(n):
                v = y[i] + scale * normals[k, i]
                if v < 0.0:
                    v = 0.0
                elif v > 1.0:
                    v = 1.0
                cand[i] = v
            f_new = _penalized_objective(Q, b, m, N, w, cand)
            delta = f_new - f
            if delta < 0.0:
                accept = True
            else:
                z = delta / temp
                prob = 0.0 if z > 700.0 else 1.0 / (1.0 + exp(z))
                accept = uniforms[k] < prob
            if accept:
                for i in range(n):
                    y[i] = cand[i]
                f = f_new
                accepted += 1
                if f < best_f:
                    best_f = f
                    for i in range(n):
                        best[i] = y[i]
        temp *= cooling
    return best_arr, best_f, accepted


def brute_force_min(const double[:, ::1] Q, const double[::1] b, Py_ssize_t m, Py_ssize_t N):
    """Exact minimizer of x^T Q x - b^T x over all one-hot-per-block x.

    Lexicographic enumeration of (k_1, ..., k_m); strict improvement keeps
    the lexicographically smallest tie.  Returns (indices, objective).
    """
    cdef cnp.ndarray[long long, ndim=1] idx_arr = np.zeros(m, dtype=np.int64)
    cdef cnp.ndarray[long long, ndim=1] best_arr = np.zeros(m, dtype=np.int64)
    cdef long long[::1] idx = idx_arr
    cdef long long[::1] best_idx = best_arr
    cdef double best_obj = INFINITY
    cdef double obj
    cdef Py_ssize_t r, s, pos
    cdef Py_ssize_t a, c

    while True:
        obj = 0.0
        for r in range(m):
            a = r * N + idx[r]
            obj -= b[a]
            for s in range(m):
                c = s * N + idx[s]
                obj += Q[a, c]
        if obj < best_obj:
            best_obj = obj
            for r in range(m):
                best_idx[r] = idx[r]
        pos = m - 1
        while pos >= 0 and idx[pos] == N - 1:
            idx[pos] = 0
            pos -= 1
        if pos < 0:
            break
        idx[pos] += 1
    return best_arr, best_obj
