"""Sections of a vector bundle viewed as maps into its total space."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import dirac as dr
from ..geometry import ChartGrid, Geometry
from ..modules import CliffordModule, twisted_module
from .yang_mills import GaugeCurvature, curvature_norm


@dataclass(eq=False)
class HiggsBundle:
    """Real fiber ``R^k`` with metric ``h``, connection ``d + A`` and a section.

    ``potential[i]`` acts on fiber coordinates; a complex rank-m bundle is
    handled as ``k = 2m`` with ``i`` acting as a rotation in each pair.
    """

    geometry: Geometry
    fiber_metric: np.ndarray
    potential: np.ndarray
    section: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.fiber_metric, dtype=float)
        k = h.shape[0]
        if h.shape != (k, k) or not np.allclose(h, h.T):
            raise ValueError("fiber metric must be a symmetric k x k matrix")
        if np.linalg.eigvalsh(h).min() <= 0:
            raise ValueError("fiber metric must be positive definite")
        n, shape = self.geometry.n, self.geometry.grid.shape
        A = np.broadcast_to(np.asarray(self.potential, dtype=float), (n,) + shape + (k, k)).copy()
        phi = np.broadcast_to(np.asarray(self.section, dtype=float), shape + (k,)).copy()
        self.fiber_metric, self.potential, self.section = h, A, phi

    @property
    def fiber_dim(self) -> int:
        return self.fiber_metric.shape[0]

    def scaled(self, factor: float) -> "HiggsBundle":
        return HiggsBundle(self.geometry, self.fiber_metric, self.potential, factor * self.section)


def complex_unit(m: int) -> np.ndarray:
    """Multiplication by ``i`` on ``C^m = R^{2m}`` with interleaved real and imaginary parts."""
    return np.kron(np.eye(m), np.array([[0.0, -1.0], [1.0, 0.0]]))


def realify(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.stack([z.real, z.imag], axis=-1).reshape(z.shape[:-1] + (2 * z.shape[-1],))


def abelian_potential(grid: ChartGrid, charges, m: int = 1) -> np.ndarray:
    """Constant ``A_i = i a_i`` on ``C^m``."""
    J = complex_unit(m)
    return np.array([np.broadcast_to(a * J, grid.shape + J.shape) for a in charges])


def covariantly_constant_section(grid: ChartGrid, charges, z0) -> np.ndarray:
    """``exp(-i a.x) z0``, parallel for ``d + i a``; needs integer charges on a torus."""
    x = np.stack(grid.mesh(), axis=-1)
    phase = np.exp(-1j * np.einsum("...i,i->...", x, np.asarray(charges, dtype=float)))
    return realify(phase[..., None] * np.asarray(z0, dtype=complex))


@dataclass
class HiggsReport:
    total_metric: np.ndarray
    map_energy: np.ndarray
    covariant_energy: np.ndarray
    identity_residual: float
    vector_residual: float
    base_dim: int


def covariant_derivative(hb: HiggsBundle) -> np.ndarray:
    """``nabla_i phi = d_i phi + A_i phi`` stacked on the first axis."""
    geo = hb.geometry
    return np.stack([geo.d(hb.section, i) + np.einsum("...kl,...l->...k", hb.potential[i], hb.section)
                     for i in range(geo.n)])


def total_space_metric(hb: HiggsBundle) -> np.ndarray:
    """``g1 + h(theta, theta)`` with ``theta = dy + A y`` at the points of the section."""
    geo = hb.geometry
    n, k = geo.n, hb.fiber_dim
    h = hb.fiber_metric
    Ay = np.einsum("i...kl,...l->...ik", hb.potential, hb.section)  # [..., i, k]
    g = np.zeros(geo.grid.shape + (n + k, n + k))
    g[..., :n, :n] = geo.metric.g + np.einsum("...ia,ab,...jb->...ij", Ay, h, Ay)
    g[..., :n, n:] = np.einsum("...ia,ab->...ib", Ay, h)
    g[..., n:, :n] = np.swapaxes(g[..., :n, n:], -1, -2)
    g[..., n:, n:] = h
    return g


def higgs_metric(hb: HiggsBundle, seed: int = 0) -> HiggsReport:
    """Energy of ``x -> (x, phi(x))`` in the total-space metric against the covariant energy."""
    geo = hb.geometry
    n = geo.n
    g2 = total_space_metric(hb)
    dphi = np.stack([geo.d(hb.section, i) for i in range(n)], axis=-2)  # [..., i, k]
    eye = np.broadcast_to(np.eye(n), geo.grid.shape + (n, n))
    dmap = np.concatenate([eye, dphi], axis=-1)  # [..., i, n + k]
    ginv = geo.metric.inverse
    energy = np.einsum("...ij,...ia,...ab,...jb->...", ginv, dmap, g2, dmap)
    nab = covariant_derivative(hb)
    cov = np.einsum("...ij,i...a,ab,j...b->...", ginv, nab, hb.fiber_metric, nab)
    residual = float(np.abs(energy - cov - n).max())
    rng = np.random.default_rng(seed)
    v = rng.normal(size=geo.grid.shape + (n,))
    dv = np.einsum("...i,...ia->...a", v, dmap)
    nv = np.einsum("...i,i...a->...a", v, nab)
    lhs = np.einsum("...a,...ab,...b->...", dv, g2, dv)
    rhs = np.einsum("...a,ab,...b->...", nv, hb.fiber_metric, nv) + np.einsum("...i,...ij,...j->...", v, geo.metric.g, v)
    return HiggsReport(g2, energy, cov, residual, float(np.abs(lhs - rhs).max()), n)


def ehc_action(geometry: Geometry, cosmological: float) -> float:
    """``int (scal + Lambda)`` over the chart."""
    return float(np.real(geometry.integrate(geometry.scal + cosmological)))


def gauge_higgs_report(geometry: Geometry, spinor: CliffordModule, hb: HiggsBundle,
                       gauge_curvature: GaugeCurvature, gauge_potential=None, psi=None,
                       cosmological: float | None = None) -> dict:
    """The four integrals of the gauge-coupled fermion and Higgs action and their sum.

    ``cosmological`` defaults to the base dimension, the value the total
    space metric produces before any rescaling.
    """
    lam = float(geometry.n) if cosmological is None else float(cosmological)
    W = gauge_curvature.rank
    E1 = twisted_module(spinor, (W, None, None))
    gauge = None
    if gauge_potential is not None:
        gauge = dr.kron_field(spinor.identity, np.asarray(gauge_potential, dtype=complex))
    conn = dr.build_clifford_connection(geometry, E1, gauge=gauge, lift="spinor")
    D = dr.quantize_connection(conn)
    if psi is None:
        psi = np.zeros(geometry.grid.shape + (E1.rank,), dtype=complex)
    fermion = complex(dr.fermion_action(D, np.asarray(psi, dtype=complex)))
    nab = covariant_derivative(hb)
    cov = np.einsum("...ij,i...a,ab,j...b->...", geometry.metric.inverse, nab, hb.fiber_metric, nab)
    higgs = float(np.real(geometry.integrate(cov)))
    ym = float(np.real(geometry.integrate(curvature_norm(gauge_curvature, geometry.eta))))
    cosmo = float(np.real(geometry.integrate(-spinor.epsilon * geometry.scal + lam)))
    terms = {"fermion": fermion, "higgs_kinetic": higgs, "yang_mills": ym, "curvature_and_lambda": cosmo}
    terms["total"] = fermion + higgs + ym + cosmo
    terms["lambda"] = lam
    return terms
