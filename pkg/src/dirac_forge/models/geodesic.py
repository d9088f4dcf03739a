"""Energy of curves in a target manifold, its minimizers and a shooting oracle."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import root

from .. import kernels
from .target import TargetMetric


class PathError(ValueError):
    pass


def _check_path(path) -> np.ndarray:
    path = np.asarray(path, dtype=float)
    if path.ndim != 2 or path.shape[0] < 3:
        raise PathError(f"a path needs at least 3 nodes, got shape {path.shape}")
    return path


def energy_and_gradient(path, metric: TargetMetric):
    """Discrete energy ``sum dx^T g(mid) dx / dt`` on ``[0, 1]`` and its gradient."""
    path = _check_path(path)
    dt = 1.0 / (path.shape[0] - 1)
    mid = 0.5 * (path[1:] + path[:-1])
    return kernels.geodesic_energy_grad(path, metric(mid), metric.grad(mid), dt)


def geodesic_energy(path, metric: TargetMetric) -> float:
    return energy_and_gradient(path, metric)[0]


@dataclass
class GeodesicResult:
    path: np.ndarray
    energy: float
    converged: bool
    iterations: int
    grad_norm: float
    notes: list = field(default_factory=list)


def _laplacian_solve(rhs, dt):
    """Solve ``(2, -1, -1) / dt`` tridiagonal systems column by column."""
    m = rhs.shape[0]
    ab = np.zeros((3, m))
    ab[0, 1:] = -1.0 / dt
    ab[1, :] = 2.0 / dt
    ab[2, :-1] = -1.0 / dt
    return solve_banded((1, 1), ab, rhs)


def straight_line(start, end, nodes: int) -> np.ndarray:
    t = np.linspace(0.0, 1.0, nodes)[:, None]
    return (1 - t) * np.asarray(start, dtype=float) + t * np.asarray(end, dtype=float)


def geodesic_minimize(start, end, metric: TargetMetric, nodes: int = 257, init=None,
                      tol: float = 1e-8, max_iter: int = 100_000, armijo: float = 1e-4) -> GeodesicResult:
    """Fixed-endpoint descent on the discrete energy.

    Steps are preconditioned by the inverse discrete Laplacian so that the
    iteration count does not grow with the number of nodes; an Armijo
    backtracking search picks the step length.  Stops once the sup-norm of
    the gradient drops below ``tol``.
    """
    path = straight_line(start, end, nodes) if init is None else _check_path(init).copy()
    if not (np.allclose(path[0], start) and np.allclose(path[-1], end)):
        raise PathError("initial path does not join the endpoints")
    notes = []
    if metric.name.startswith("sphere"):
        d = sphere_distance(start, end)
        if d > math.pi - 0.1:
            msg = f"endpoints at distance {d:.4f} are close to antipodal; minimizers form a near-degenerate family"
            warnings.warn(msg, stacklevel=2)
            notes.append(msg)
    dt = 1.0 / (path.shape[0] - 1)
    energy, grad = energy_and_gradient(path, metric)
    gnorm = float(np.abs(grad).max())
    it = 0
    while gnorm >= tol and it < max_iter:
        it += 1
        direction = np.zeros_like(path)
        direction[1:-1] = -0.5 * _laplacian_solve(grad[1:-1], dt)
        slope = float(np.sum(grad * direction))
        if slope >= 0:
            direction, slope = -grad, -float(np.sum(grad * grad))
        step = 1.0
        while True:
            trial = path + step * direction
            e_trial, g_trial = energy_and_gradient(trial, metric)
            if e_trial <= energy + armijo * step * slope or step < 1e-12:
                break
            step *= 0.5
        if step < 1e-12:
            notes.append("line search stalled")
            break
        path, energy, grad = trial, e_trial, g_trial
        gnorm = float(np.abs(grad).max())
    return GeodesicResult(path, energy, gnorm < tol, it, gnorm, notes)


def _geodesic_rhs(state, metric: TargetMetric):
    d = metric.dim
    x, v = state[:d], state[d:]
    gam = metric.christoffels(x)
    acc = -np.einsum("kij,i,j->k", gam, v, v)
    return np.concatenate([v, acc])


def integrate_geodesic(start, velocity, metric: TargetMetric, nodes: int, substeps: int = 4) -> np.ndarray:
    """Classical RK4 on ``x'' = -Gamma(x', x')`` over ``[0, 1]``, sampled at ``nodes`` points."""
    state = np.concatenate([np.asarray(start, dtype=float), np.asarray(velocity, dtype=float)])
    h = 1.0 / ((nodes - 1) * substeps)
    out = [state[:metric.dim].copy()]
    for _ in range(nodes - 1):
        for _ in range(substeps):
            k1 = _geodesic_rhs(state, metric)
            k2 = _geodesic_rhs(state + 0.5 * h * k1, metric)
            k3 = _geodesic_rhs(state + 0.5 * h * k2, metric)
            k4 = _geodesic_rhs(state + h * k3, metric)
            state = state + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(state[:metric.dim].copy())
    return np.array(out)


def shoot_geodesic(start, end, metric: TargetMetric, nodes: int = 257, guess=None):
    """Initial velocity hitting ``end`` at ``t = 1``, and the sampled geodesic."""
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    v0 = end - start if guess is None else np.asarray(guess, dtype=float)

    def miss(v):
        return integrate_geodesic(start, v, metric, nodes)[-1] - end
    sol = root(miss, v0, tol=1e-13)
    if not sol.success:
        raise RuntimeError(f"shooting did not converge: {sol.message}")
    return integrate_geodesic(start, sol.x, metric, nodes), sol.x


# ------------------------------------------------------------ sphere helpers

def to_cartesian(theta, phi) -> np.ndarray:
    return np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1)


def sphere_distance(p, q) -> float:
    a = to_cartesian(p[0], p[1])
    b = to_cartesian(q[0], q[1])
    return float(math.atan2(np.linalg.norm(np.cross(a, b)), np.dot(a, b)))


def great_circle_endpoints(distance: float, inclination: float = 0.6, offset: float = 0.3):
    """Two points at arc ``distance`` on a great circle tilted away from the poles."""
    pts = []
    for s in (offset, offset + distance):
        xyz = np.array([math.cos(s), math.sin(s) * math.cos(inclination), math.sin(s) * math.sin(inclination)])
        pts.append(np.array([math.acos(xyz[2]), math.atan2(xyz[1], xyz[0])]))
    # keep the longitude continuous along the arc
    if pts[1][1] < pts[0][1]:
        pts[1][1] += 2 * math.pi
    return pts[0], pts[1]


def great_circle_path(distance: float, nodes: int, inclination: float = 0.6, offset: float = 0.3,
                      reparam=None) -> np.ndarray:
    """Chart samples of the arc, optionally along a reparametrization ``s(t)`` of ``[0, 1]``."""
    t = np.linspace(0.0, 1.0, nodes)
    s = offset + distance * (t if reparam is None else reparam(t))
    xyz = np.stack([np.cos(s), np.sin(s) * math.cos(inclination), np.sin(s) * math.sin(inclination)], axis=-1)
    theta = np.arccos(xyz[:, 2])
    phi = np.unwrap(np.arctan2(xyz[:, 1], xyz[:, 0]))
    return np.stack([theta, phi], axis=-1)
