"""Metrics on target manifolds, evaluated at arbitrary points rather than on a grid."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..geometry import coframe_from_inverse

# fourth-order central difference weights for metric derivatives
_FD_OFFSETS = (-2, -1, 1, 2)
_FD_WEIGHTS = (1 / 12, -8 / 12, 8 / 12, -1 / 12)


@dataclass(frozen=True)
class TargetMetric:
    dim: int
    fn: Callable
    grad_fn: Callable | None = None
    name: str = "target"
    step: float = 1e-3

    def __call__(self, points) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(points, dtype=float)), dtype=float)

    def grad(self, points) -> np.ndarray:
        """``dg[..., l, i, j] = d_l g_ij`` at the given points."""
        points = np.asarray(points, dtype=float)
        if self.grad_fn is not None:
            return np.asarray(self.grad_fn(points), dtype=float)
        out = []
        for l in range(self.dim):
            acc = 0
            for off, w in zip(_FD_OFFSETS, _FD_WEIGHTS):
                shifted = points.copy()
                shifted[..., l] += off * self.step
                acc = acc + w * self(shifted)
            out.append(acc / self.step)
        return np.stack(out, axis=-3)

    def christoffels(self, points) -> np.ndarray:
        """``Gamma[..., k, i, j]`` of the Levi-Civita connection at the points."""
        g = self(points)
        dg = self.grad(points)
        t = np.einsum("...ijl->...lij", dg) + np.einsum("...jil->...lij", dg) - dg
        return 0.5 * np.einsum("...kl,...lij->...kij", np.linalg.inv(g), t)

    def coframe(self, points):
        """Orthonormal coframe ``f[..., alpha, mu]`` and its signature."""
        return coframe_from_inverse(np.linalg.inv(self(points)))


def flat_target(dim: int, eta=None) -> TargetMetric:
    eta = np.ones(dim) if eta is None else np.asarray(eta, dtype=float)

    def fn(p):
        return np.broadcast_to(np.diag(eta), p.shape[:-1] + (dim, dim)).copy()

    def grad(p):
        return np.zeros(p.shape[:-1] + (dim, dim, dim))
    return TargetMetric(dim, fn, grad, name="flat")


def sphere_target(radius: float = 1.0) -> TargetMetric:
    """Round sphere in polar coordinates ``(theta, phi)``."""
    def fn(p):
        g = np.zeros(p.shape[:-1] + (2, 2))
        g[..., 0, 0] = radius ** 2
        g[..., 1, 1] = (radius * np.sin(p[..., 0])) ** 2
        return g

    def grad(p):
        dg = np.zeros(p.shape[:-1] + (2, 2, 2))
        dg[..., 0, 1, 1] = 2 * radius ** 2 * np.sin(p[..., 0]) * np.cos(p[..., 0])
        return dg
    return TargetMetric(2, fn, grad, name=f"sphere(r={radius})")


TARGETS = {
    "flat": lambda dim=2: flat_target(dim),
    "unit-sphere": lambda dim=2: sphere_target(1.0),
}
