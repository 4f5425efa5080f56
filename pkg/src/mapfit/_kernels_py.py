"""Pure-numpy implementations of the hot kernels.

Mirrors the API of the compiled extension ``mapfit._kernels``; whichever is
available is picked by ``mapfit._backend``.  All functions expect
C-contiguous float64 arrays and never mutate their inputs.
"""

import math

import numpy as np

BACKEND_NAME = "python"


def _axis_slices(ndim, axis, lo, hi):
    sl = [slice(None)] * ndim
    sl[axis] = slice(lo, hi)
    return tuple(sl)


def blur_3d(values, taps):
    """Separable zero-padded convolution with a symmetric 1D kernel per axis."""
    taps = np.asarray(taps, dtype=np.float64)
    radius = taps.shape[0] // 2
    out = np.asarray(values, dtype=np.float64)
    for axis in range(3):
        n = out.shape[axis]
        acc = np.zeros_like(out)
        for j in range(taps.shape[0]):
            s = j - radius
            dst = _axis_slices(3, axis, max(0, -s), min(n, n - s))
            src = _axis_slices(3, axis, max(0, s), min(n, n + s))
            acc[dst] += taps[j] * out[src]
        out = acc
    return out


def laplacian_3d(values):
    """7-point discrete Laplacian (center -6, face neighbors +1), zero-padded."""
    v = np.asarray(values, dtype=np.float64)
    out = -6.0 * v
    for axis in range(3):
        n = v.shape[axis]
        lo = _axis_slices(3, axis, 0, n - 1)
        hi = _axis_slices(3, axis, 1, n)
        out[lo] += v[hi]
        out[hi] += v[lo]
    return out


def overlap_dot(a, b, offset):
    """Sum of a[i]*b[i - offset] over the index intersection; 0 if disjoint."""
    lo = np.maximum(0, offset)
    hi = np.minimum(a.shape, np.asarray(b.shape) + offset)
    if np.any(hi <= lo):
        return 0.0
    a_sub = a[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]]
    b_sub = b[lo[0] - offset[0]:hi[0] - offset[0],
              lo[1] - offset[1]:hi[1] - offset[1],
              lo[2] - offset[2]:hi[2] - offset[2]]
    return float(np.einsum("ijk,ijk->", a_sub, b_sub))


def _penalized_objective(Q, b, m, N, w, y):
    f = float(y @ Q @ y - b @ y)
    if w != 0.0:
        block_sums = y.reshape(m, N).sum(axis=1)
        f += w * float(np.abs(block_sums - 1.0).sum())
    return f


def sa_minimize(Q, b, m, N, y0, t0, cooling, w, iters, normals, uniforms,
                raw_step):
    """Simulated-annealing descent over the unit box with pre-drawn randoms.

    ``normals`` has shape (iters, n) and supplies proposal directions;
    ``uniforms`` has shape (iters,) and supplies acceptance draws.  Returns
    (best_y, best_f, accepted_count).
    """
    y = np.array(y0, dtype=np.float64)
    f = _penalized_objective(Q, b, m, N, w, y)
    best_y = y.copy()
    best_f = f
    accepted = 0
    temp = t0
    for k in range(iters):
        u = normals[k]
        norm = math.sqrt(float(u @ u))
        if norm > 0.0:
            step = temp if raw_step else min(temp, 1.0)
            y_new = np.clip(y + (step / norm) * u, 0.0, 1.0)
            f_new = _penalized_objective(Q, b, m, N, w, y_new)
            delta = f_new - f
            if delta < 0.0:
                accept = True
            else:
                z = delta / temp
                prob = 0.0 if z > 700.0 else 1.0 / (1.0 + math.exp(z))
                accept = uniforms[k] < prob
            if accept:
                y = y_new
                f = f_new
                accepted += 1
                if f < best_f:
                    best_f = f
                    best_y = y.copy()
        temp *= cooling
    return best_y, best_f, accepted


def brute_force_min(Q, b, m, N):
    """Exact minimizer of x^T Q x - b^T x over all one-hot-per-block x.

    Enumerates the N**m assignments in lexicographic (k_1, ..., k_m) order;
    strict improvement keeps the lexicographically smallest tie.  Returns
    (indices, objective) with 0-based position indices per protein.
    """
    idx = np.zeros(m, dtype=np.int64)
    best_idx = idx.copy()
    best_obj = math.inf
    offsets = np.arange(m, dtype=np.int64) * N
    while True:
        cols = offsets + idx
        obj = float(Q[np.ix_(cols, cols)].sum() - b[cols].sum())
        if obj < best_obj:
            best_obj = obj
            best_idx = idx.copy()
        # odometer increment, most-significant digit first for lex order
        pos = m - 1
        while pos >= 0 and idx[pos] == N - 1:
            idx[pos] = 0
            pos -= 1
        if pos < 0:
            break
        idx[pos] += 1
    return best_idx, best_obj
