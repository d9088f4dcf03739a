"""Finite-difference chart geometry.

Fields live on a tensor-product grid and always carry the grid axes first:
a scalar field has shape ``grid.shape``, a metric ``grid.shape + (n, n)``,
a fiber section ``grid.shape + (N,)`` and so on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class ChartGrid:
    shape: tuple
    spacing: tuple
    origin: tuple
    periodic: tuple

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))
        object.__setattr__(self, "spacing", tuple(float(h) for h in self.spacing))
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        object.__setattr__(self, "periodic", tuple(bool(p) for p in self.periodic))
        if not len(self.shape) == len(self.spacing) == len(self.origin) == len(self.periodic):
            raise GridError("shape, spacing, origin and periodic must have equal length")
        for s, h, per in zip(self.shape, self.spacing, self.periodic):
            if h <= 0:
                raise GridError(f"spacing must be positive, got {h}")
            if not per and s < 5:
                raise GridError(f"non-periodic axis needs at least 5 nodes, got {s}")
            if per and s < 3:
                raise GridError(f"periodic axis needs at least 3 nodes, got {s}")

    @classmethod
    def torus(cls, nodes, lengths=None):
        """Fully periodic box ``[0, L_i)``, default ``L_i = 2 pi``."""
        nodes = tuple(nodes)
        lengths = tuple(lengths) if lengths is not None else (2 * math.pi,) * len(nodes)
        return cls(nodes, tuple(L / s for L, s in zip(lengths, nodes)), (0.0,) * len(nodes),
                   (True,) * len(nodes))

    @classmethod
    def interval(cls, nodes, start=0.0, stop=1.0):
        """Closed interval with both endpoints as nodes."""
        return cls((nodes,), ((stop - start) / (nodes - 1),), (start,), (False,))

    @property
    def n(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def axis_coords(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.spacing[axis] * np.arange(self.shape[axis])

    def mesh(self):
        return np.meshgrid(*[self.axis_coords(a) for a in range(self.n)], indexing="ij")

    def weights(self) -> np.ndarray:
        """Quadrature weights: rectangle rule on periodic axes, trapezoid otherwise."""
        w = np.ones(self.shape)
        for a, (s, h, per) in enumerate(zip(self.shape, self.spacing, self.periodic)):
            wa = np.full(s, h)
            if not per:
                wa[0] = wa[-1] = h / 2
            shape = [1] * self.n
            shape[a] = s
            w = w * wa.reshape(shape)
        return w

    def interior_mask(self, margin: int) -> np.ndarray:
        """Nodes at least ``margin`` away from every non-periodic edge."""
        mask = np.ones(self.shape, dtype=bool)
        for a, (s, per) in enumerate(zip(self.shape, self.periodic)):
            if per or margin == 0:
                continue
            sl = [slice(None)] * self.n
            sl[a] = slice(0, margin)
            mask[tuple(sl)] = False
            sl[a] = slice(s - margin, s)
            mask[tuple(sl)] = False
        return mask

    def refined(self, factor: int = 2) -> "ChartGrid":
        """Same chart with ``factor`` times the resolution."""
        shape, spacing = [], []
        for s, h, per in zip(self.shape, self.spacing, self.periodic):
            if per:
                shape.append(s * factor)
                spacing.append(h / factor)
            else:
                shape.append((s - 1) * factor + 1)
                spacing.append(h / factor)
        return ChartGrid(tuple(shape), tuple(spacing), self.origin, self.periodic)


def sphere_cap_grid(n_theta, n_phi=None, theta_min=0.2, theta_max=None):
    """Polar chart ``(theta, phi)`` of the sphere with the poles cut away."""
    n_phi = n_theta if n_phi is None else n_phi
    theta_max = math.pi - theta_min if theta_max is None else theta_max
    return ChartGrid((n_theta, n_phi), ((theta_max - theta_min) / (n_theta - 1), 2 * math.pi / n_phi),
                     (theta_min, 0.0), (False, True))


def partial_derivative(values, grid: ChartGrid, axis: int, order: int = 2) -> np.ndarray:
    """Central difference along a grid axis; one-sided of the same order at open edges."""
    if order not in (2, 4):
        raise ValueError(f"stencil order must be 2 or 4, got {order}")
    values = np.asarray(values)
    s = grid.shape[axis]
    need = 3 if order == 2 else 5
    if s < need:
        raise GridError(f"axis {axis} has {s} nodes, order {order} needs {need}")
    if values.shape[:grid.n] != grid.shape:
        raise GridError(f"field shape {values.shape} does not start with grid shape {grid.shape}")
    pre = int(np.prod(values.shape[:axis]))
    post = int(np.prod(values.shape[axis + 1:]))
    dtype = np.complex128 if np.iscomplexobj(values) else np.float64
    flat = np.ascontiguousarray(values, dtype=dtype).reshape(pre, s, post)
    out = kernels.diff_axis(flat, grid.spacing[axis], order, grid.periodic[axis])
    return out.reshape(values.shape)


def gradient(values, grid: ChartGrid, order: int = 2) -> np.ndarray:
    """All partial derivatives stacked on a new leading axis."""
    return np.stack([partial_derivative(values, grid, a, order) for a in range(grid.n)])


class MetricError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class MetricField:
    grid: ChartGrid
    g: np.ndarray
    name: str = "raw"
    det_tol: float = 1e-12

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        n = self.grid.n
        if g.shape != self.grid.shape + (n, n):
            raise MetricError(f"metric shape {g.shape} does not match grid {self.grid.shape} x ({n},{n})")
        if not np.array_equal(g, np.swapaxes(g, -1, -2)):
            raise MetricError("metric is not exactly symmetric")
        det = np.linalg.det(g)
        if np.min(np.abs(det)) <= self.det_tol:
            worst = np.unravel_index(np.argmin(np.abs(det)), det.shape)
            raise MetricError(f"metric is degenerate at node {worst}")
        eig = np.linalg.eigvalsh(g)
        neg = np.sum(eig < 0, axis=-1)
        if np.any(neg != neg.flat[0]):
            raise MetricError("metric signature changes across the grid")
        g.setflags(write=False)
        object.__setattr__(self, "g", g)

    @classmethod
    def from_callback(cls, grid: ChartGrid, fn, name="callback"):
        """Sample ``fn(*coordinates) -> (..., n, n)`` at every node."""
        g = np.asarray(fn(*grid.mesh()), dtype=float)
        return cls(grid, np.ascontiguousarray(g), name=name)

    @cached_property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.g)

    @cached_property
    def det(self) -> np.ndarray:
        return np.linalg.det(self.g)

    @cached_property
    def sqrt_det(self) -> np.ndarray:
        return np.sqrt(np.abs(self.det))

    @property
    def signature(self):
        eig = np.linalg.eigvalsh(self.g.reshape(-1, self.grid.n, self.grid.n)[0])
        q = int(np.sum(eig < 0))
        return self.grid.n - q, q


# ------------------------------------------------------------------ presets

def flat_metric_fn(eta):
    eta = np.asarray(eta, dtype=float)

    def fn(*x):
        return np.broadcast_to(np.diag(eta), x[0].shape + (len(eta), len(eta))).copy()
    return fn


def sphere_metric_fn(radius=1.0):
    def fn(theta, phi):
        g = np.zeros(theta.shape + (2, 2))
        g[..., 0, 0] = radius ** 2
        g[..., 1, 1] = (radius * np.sin(theta)) ** 2
        return g
    return fn


def hyperbolic_metric_fn():
    """Upper half plane ``(dx^2 + dy^2) / y^2``; the chart needs ``y > 0``."""
    def fn(x, y):
        g = np.zeros(x.shape + (2, 2))
        g[..., 0, 0] = g[..., 1, 1] = 1.0 / y ** 2
        return g
    return fn


def conformal_torus_metric_fn(amplitude=0.1, n=2):
    """``exp(2u) delta`` with ``u = amplitude * sin(x) cos(y)``: curved but closed."""
    def fn(*x):
        u = amplitude * np.sin(x[0]) * (np.cos(x[1]) if n > 1 else 1.0)
        g = np.zeros(x[0].shape + (n, n))
        for i in range(n):
            g[..., i, i] = np.exp(2 * u)
        return g
    return fn


def kaluza_klein_metric_fn(base_fn, fiber_metric, potential_fn):
    """``g_base + h(dy + A dx, dy + A dx)`` with a one-form potential ``A_i(x)``.

    ``base_fn`` and ``potential_fn`` take the base coordinates; the total
    chart has the base coordinates first and the fiber coordinates last.
    """
    h = np.atleast_2d(np.asarray(fiber_metric, dtype=float))
    k = h.shape[0]

    def fn(*coords):
        nb = len(coords) - k
        base = np.asarray(base_fn(*coords[:nb]))
        pot = np.asarray(potential_fn(*coords[:nb]))  # (..., nb, k)
        n = nb + k
        g = np.zeros(coords[0].shape + (n, n))
        g[..., :nb, :nb] = base + np.einsum("...ia,ab,...jb->...ij", pot, h, pot)
        g[..., :nb, nb:] = np.einsum("...ia,ab->...ib", pot, h)
        g[..., nb:, :nb] = np.swapaxes(g[..., :nb, nb:], -1, -2)
        g[..., nb:, nb:] = h
        return g
    return fn


def flat_metric(grid: ChartGrid, eta=None) -> MetricField:
    eta = np.ones(grid.n) if eta is None else eta
    return MetricField.from_callback(grid, flat_metric_fn(eta), name="flat")


def sphere_metric(grid: ChartGrid, radius=1.0) -> MetricField:
    return MetricField.from_callback(grid, sphere_metric_fn(radius), name=f"sphere(r={radius})")


def conformal_torus_metric(grid: ChartGrid, amplitude=0.1) -> MetricField:
    return MetricField.from_callback(grid, conformal_torus_metric_fn(amplitude, grid.n), name="conformal-torus")


def metric_from_table(grid: ChartGrid, table) -> MetricField:
    """Raw ingest: node-major table of ``n*n`` row-major entries per node."""
    table = np.asarray(table, dtype=float)
    n = grid.n
    return MetricField(grid, table.reshape(grid.shape + (n, n)), name="table")


# ---------------------------------------------------------- derived fields

class DegenerateFrameError(ValueError):
    pass


def orthonormal_coframe(metric: MetricField, tol=1e-12):
    """Signature-aware Gram-Schmidt on ``dx^1, ..., dx^n`` in axis order.

    Returns ``(coframe, eta)`` where ``coframe[..., a, i]`` are the
    components of ``e^a`` and rows are ordered positive-norm first.  The
    result is lower triangular up to that reordering, with the orientation
    of the coordinate coframe.
    """
    return coframe_from_inverse(metric.inverse, tol)


def coframe_from_inverse(ginv, tol=1e-12):
    """Gram-Schmidt of the coordinate coframe for an array of inverse metrics."""
    ginv = np.asarray(ginv, dtype=float)
    n = ginv.shape[-1]
    rows, signs = [], []
    for i in range(n):
        v = np.zeros(ginv.shape[:-2] + (n,))
        v[..., i] = 1.0
        for e, s in zip(rows, signs):
            proj = np.einsum("...i,...ij,...j->...", v, ginv, e)
            v = v - (proj * s)[..., None] * e
        norm2 = np.einsum("...i,...ij,...j->...", v, ginv, v)
        if np.min(np.abs(norm2)) <= tol:
            raise DegenerateFrameError(f"null direction in Gram-Schmidt step {i}")
        sgn = np.sign(norm2)
        if np.any(sgn != sgn.flat[0]):
            raise DegenerateFrameError("frame signature changes across the grid")
        signs.append(float(sgn.flat[0]))
        rows.append(v / np.sqrt(np.abs(norm2))[..., None])
    order = sorted(range(n), key=lambda k: -signs[k])
    coframe = np.stack([rows[k] for k in order], axis=-2)
    if np.linalg.det(np.eye(n)[order]) < 0:
        coframe[..., -1, :] *= -1
    eta = np.array([signs[k] for k in order])
    return coframe, eta


def orthonormality_error(metric: MetricField, coframe, eta) -> float:
    """``max |e^a g^-1 e^b - eta^ab|`` over nodes."""
    gram = np.einsum("...ai,...ij,...bj->...ab", coframe, metric.inverse, coframe)
    return float(np.abs(gram - np.diag(eta)).max())


def frame_from_coframe(coframe) -> np.ndarray:
    """Dual frame ``E[..., a, i]`` with ``e^a(E_b) = delta^a_b``."""
    return np.swapaxes(np.linalg.inv(coframe), -1, -2)


def christoffels(metric: MetricField, order: int = 4) -> np.ndarray:
    """``Gamma[..., k, i, j]`` of the Levi-Civita connection."""
    dg = gradient(metric.g, metric.grid, order)  # dg[l] = d_l g_ij
    dg = np.moveaxis(dg, 0, -3)  # (..., l, i, j)
    # t[l, i, j] = d_i g_jl + d_j g_il - d_l g_ij
    t = np.einsum("...ijl->...lij", dg) + np.einsum("...jil->...lij", dg) - dg
    return 0.5 * np.einsum("...kl,...lij->...kij", metric.inverse, t)


def ricci_tensor(metric: MetricField, order: int = 4, gamma=None) -> np.ndarray:
    gam = christoffels(metric, order) if gamma is None else gamma
    dgam = gradient(gam, metric.grid, order)  # dgam[m, ..., r, i, j]
    # R_sn = d_r G^r_ns - d_n G^r_rs + G^r_rl G^l_ns - G^r_nl G^l_rs
    term1 = np.einsum("r...rns->...sn", dgam)
    term2 = np.einsum("n...rrs->...sn", dgam)
    term3 = np.einsum("...rrl,...lns->...sn", gam, gam)
    term4 = np.einsum("...rnl,...lrs->...sn", gam, gam)
    return term1 - term2 + term3 - term4


def scalar_curvature(metric: MetricField, order: int = 4, gamma=None) -> np.ndarray:
    ric = ricci_tensor(metric, order, gamma)
    return np.einsum("...ij,...ij->...", metric.inverse, ric)


def codifferential(alpha, metric: MetricField, order: int = 2) -> np.ndarray:
    """``delta alpha = -(1/sqrt|g|) d_i (sqrt|g| g^ij alpha_j)``, the formal adjoint of d."""
    alpha = np.asarray(alpha)
    flux = metric.sqrt_det[..., None] * np.einsum("...ij,...j->...i", metric.inverse, alpha)
    div = sum(partial_derivative(flux[..., i], metric.grid, i, order) for i in range(metric.grid.n))
    return -div / metric.sqrt_det


def exterior_derivative(f, grid: ChartGrid, order: int = 2) -> np.ndarray:
    return np.moveaxis(gradient(f, grid, order), 0, -1)


def integrate(values, metric: MetricField):
    """``sum f sqrt|g| w`` over nodes in lexicographic order with exact rounding."""
    vals = np.asarray(values) * metric.sqrt_det * metric.grid.weights()
    if vals.shape != metric.grid.shape:
        raise GridError(f"integrand shape {vals.shape} is not the grid shape {metric.grid.shape}")
    flat = vals.ravel()
    if np.iscomplexobj(flat):
        return complex(math.fsum(flat.real), math.fsum(flat.imag))
    return math.fsum(flat)


@dataclass(eq=False)
class Geometry:
    """A chart with its metric and the derived fields every connection needs."""

    metric: MetricField
    order: int = 2
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def grid(self) -> ChartGrid:
        return self.metric.grid

    @property
    def n(self) -> int:
        return self.grid.n

    @cached_property
    def coframe_and_eta(self):
        return orthonormal_coframe(self.metric)

    @property
    def coframe(self) -> np.ndarray:
        return self.coframe_and_eta[0]

    @property
    def eta(self) -> np.ndarray:
        return self.coframe_and_eta[1]

    @cached_property
    def frame(self) -> np.ndarray:
        return frame_from_coframe(self.coframe)

    @cached_property
    def christoffel(self) -> np.ndarray:
        return christoffels(self.metric, self.order)

    @cached_property
    def scal(self) -> np.ndarray:
        return scalar_curvature(self.metric, self.order, self.christoffel)

    @cached_property
    def coordinate_codifferentials(self) -> np.ndarray:
        """``delta(dx^k)`` for every coordinate, stacked on the last axis."""
        n = self.n
        out = []
        for k in range(n):
            alpha = np.zeros(self.grid.shape + (n,))
            alpha[..., k] = 1.0
            out.append(codifferential(alpha, self.metric, self.order))
        return np.stack(out, axis=-1)

    def d(self, values, axis):
        return partial_derivative(values, self.grid, axis, self.order)

    def integrate(self, values):
        return integrate(values, self.metric)


@dataclass(frozen=True, eq=False)
class SectionField:
    """Fiber vectors at every node, tied to the module they live in."""

    module: object
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape[-1] != self.module.rank:
            raise ValueError(f"fiber dimension {vals.shape[-1]} differs from module rank {self.module.rank}")
        object.__setattr__(self, "values", vals)
