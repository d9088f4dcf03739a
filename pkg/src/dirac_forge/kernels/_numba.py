"""numba-compiled kernels; twins of the functions in ``_numpy``."""

import numpy as np
from numba import njit

_opts = dict(nogil=True, cache=True, fastmath=False, error_model="numpy")


@njit(**_opts)
def _diff_axis(f, h, order, periodic, out):
    pre, n, post = f.shape
    for a in range(pre):
        for i in range(n):
            for c in range(post):
                if order == 2:
                    if periodic:
                        v = (f[a, (i + 1) % n, c] - f[a, (i - 1) % n, c]) / (2.0 * h)
                    elif i == 0:
                        v = (-3.0 * f[a, 0, c] + 4.0 * f[a, 1, c] - f[a, 2, c]) / (2.0 * h)
                    elif i == n - 1:
                        v = (3.0 * f[a, n - 1, c] - 4.0 * f[a, n - 2, c] + f[a, n - 3, c]) / (2.0 * h)
                    else:
                        v = (f[a, i + 1, c] - f[a, i - 1, c]) / (2.0 * h)
                else:
                    if periodic or (1 < i < n - 2):
                        v = (f[a, (i - 2) % n, c] - 8.0 * f[a, (i - 1) % n, c]
                             + 8.0 * f[a, (i + 1) % n, c] - f[a, (i + 2) % n, c]) / (12.0 * h)
                    elif i == 0:
                        v = (-25.0 * f[a, 0, c] + 48.0 * f[a, 1, c] - 36.0 * f[a, 2, c]
                             + 16.0 * f[a, 3, c] - 3.0 * f[a, 4, c]) / (12.0 * h)
                    elif i == 1:
                        v = (-3.0 * f[a, 0, c] - 10.0 * f[a, 1, c] + 18.0 * f[a, 2, c]
                             - 6.0 * f[a, 3, c] + f[a, 4, c]) / (12.0 * h)
                    elif i == n - 2:
                        v = -(-3.0 * f[a, n - 1, c] - 10.0 * f[a, n - 2, c] + 18.0 * f[a, n - 3, c]
                              - 6.0 * f[a, n - 4, c] + f[a, n - 5, c]) / (12.0 * h)
                    else:
                        v = -(-25.0 * f[a, n - 1, c] + 48.0 * f[a, n - 2, c] - 36.0 * f[a, n - 3, c]
                              + 16.0 * f[a, n - 4, c] - 3.0 * f[a, n - 5, c]) / (12.0 * h)
                out[a, i, c] = v
    return out


def diff_axis(f, h, order, periodic):
    out = np.empty_like(f)
    return _diff_axis(f, float(h), int(order), bool(periodic), out)


@njit(**_opts)
def _node_matmul(a, b, out):
    m, n, k = a.shape
    l = b.shape[2]
    for s in range(m):
        for i in range(n):
            for j in range(l):
                acc = 0.0 * a[s, 0, 0]
                for t in range(k):
                    acc += a[s, i, t] * b[s, t, j]
                out[s, i, j] = acc
    return out


def node_matmul(a, b):
    dtype = np.result_type(a, b)
    a = np.ascontiguousarray(a, dtype=dtype)
    b = np.ascontiguousarray(b, dtype=dtype)
    out = np.empty((a.shape[0], a.shape[1], b.shape[2]), dtype=dtype)
    return _node_matmul(a, b, out)


@njit(**_opts)
def _node_matvec(a, x, out):
    m, n, k = a.shape
    for s in range(m):
        for i in range(n):
            acc = 0.0 * a[s, 0, 0]
            for t in range(k):
                acc += a[s, i, t] * x[s, t]
            out[s, i] = acc
    return out


def node_matvec(a, x):
    dtype = np.result_type(a, x)
    a = np.ascontiguousarray(a, dtype=dtype)
    x = np.ascontiguousarray(x, dtype=dtype)
    out = np.empty((a.shape[0], a.shape[1]), dtype=dtype)
    return _node_matvec(a, x, out)


@njit(**_opts)
def _geodesic_energy_grad(x, g_mid, dg_mid, dt, grad):
    nseg, dim = g_mid.shape[0], g_mid.shape[1]
    energy = 0.0
    gdx = np.zeros((nseg, dim))
    quad = np.zeros((nseg, dim))
    for k in range(nseg):
        for i in range(dim):
            acc = 0.0
            for j in range(dim):
                acc += g_mid[k, i, j] * (x[k + 1, j] - x[k, j])
            gdx[k, i] = acc
            energy += (x[k + 1, i] - x[k, i]) * acc
        for l in range(dim):
            acc = 0.0
            for i in range(dim):
                for j in range(dim):
                    acc += (x[k + 1, i] - x[k, i]) * dg_mid[k, l, i, j] * (x[k + 1, j] - x[k, j])
            quad[k, l] = acc
    for i in range(dim):
        grad[0, i] = 0.0
        grad[nseg, i] = 0.0
    for k in range(1, nseg):
        for i in range(dim):
            grad[k, i] = (2.0 * (gdx[k - 1, i] - gdx[k, i]) + 0.5 * (quad[k - 1, i] + quad[k, i])) / dt
    return energy / dt


def geodesic_energy_grad(x, g_mid, dg_mid, dt):
    x = np.ascontiguousarray(x, dtype=np.float64)
    grad = np.empty_like(x)
    energy = _geodesic_energy_grad(x, np.ascontiguousarray(g_mid, dtype=np.float64),
                                   np.ascontiguousarray(dg_mid, dtype=np.float64), float(dt), grad)
    return float(energy), grad
