"""Pure-numpy reference kernels.

Every function here has a twin in ``_numba`` with the same signature and
the same floating-point contract (results agree to rounding).
"""

import numpy as np

# one-sided first-derivative weights, row r is the stencil for node r
_EDGE2 = np.array([[-3.0, 4.0, -1.0]]) / 2.0
_EDGE4 = np.array([
    [-25.0, 48.0, -36.0, 16.0, -3.0],
    [-3.0, -10.0, 18.0, -6.0, 1.0],
]) / 12.0


def diff_axis(f, h, order, periodic):
    """First derivative along the middle axis of a (pre, n, post) array."""
    n = f.shape[1]
    out = np.empty_like(f)
    if order == 2:
        if periodic:
            out[:] = (np.roll(f, -1, axis=1) - np.roll(f, 1, axis=1)) / (2.0 * h)
            return out
        out[:, 1:-1] = (f[:, 2:] - f[:, :-2]) / (2.0 * h)
        w = _EDGE2[0]
        out[:, 0] = (w[0] * f[:, 0] + w[1] * f[:, 1] + w[2] * f[:, 2]) / h
        out[:, n - 1] = -(w[0] * f[:, n - 1] + w[1] * f[:, n - 2] + w[2] * f[:, n - 3]) / h
        return out
    if periodic:
        out[:] = (np.roll(f, 2, axis=1) - 8.0 * np.roll(f, 1, axis=1)
                  + 8.0 * np.roll(f, -1, axis=1) - np.roll(f, -2, axis=1)) / (12.0 * h)
        return out
    out[:, 2:-2] = (f[:, :-4] - 8.0 * f[:, 1:-3] + 8.0 * f[:, 3:-1] - f[:, 4:]) / (12.0 * h)
    for r in range(2):
        w = _EDGE4[r]
        acc = np.zeros_like(f[:, 0])
        acc_hi = np.zeros_like(f[:, 0])
        for k in range(5):
            acc = acc + w[k] * f[:, k]
            acc_hi = acc_hi + w[k] * f[:, n - 1 - k]
        out[:, r] = acc / h
        out[:, n - 1 - r] = -acc_hi / h
    return out


def node_matmul(a, b):
    """Batched matrix product over the leading node axis: (M,N,K)@(M,K,L)."""
    return np.matmul(a, b)


def node_matvec(a, x):
    """Batched matrix-vector product: (M,N,K)@(M,K)."""
    return np.einsum("mij,mj->mi", a, x)


def geodesic_energy_grad(x, g_mid, dg_mid, dt):
    """Discrete curve energy and its gradient.

    The energy is ``sum_k dx_k^T g(m_k) dx_k / dt`` with ``m_k`` the
    segment midpoint; ``dg_mid[k, l]`` holds the derivative of the metric
    along coordinate ``l`` at ``m_k``.  Endpoint gradient rows are zero.
    """
    dx = x[1:] - x[:-1]
    gdx = np.einsum("kij,kj->ki", g_mid, dx)
    energy = float(np.sum(dx * gdx)) / dt
    quad = np.einsum("ki,klij,kj->kl", dx, dg_mid, dx)
    grad = np.zeros_like(x)
    grad[1:-1] = (2.0 * (gdx[:-1] - gdx[1:]) + 0.5 * (quad[:-1] + quad[1:])) / dt
    return energy, grad
