"""Maps between manifolds and the zero-order fields they induce on Clifford twists."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .. import dirac as dr
from ..geometry import Geometry
from ..modules import BiModule, CliffordModule, clifford_twist, regular_module, twisted_module
from .target import TargetMetric


@dataclass(eq=False)
class SigmaMap:
    """``phi(x) = values(x) + linear_part @ x`` sampled on the base grid.

    The linear part lets a map wind around a periodic base while
    ``values`` stays periodic.
    """

    geometry: Geometry
    values: np.ndarray
    target: TargetMetric
    linear_part: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.geometry.grid.shape + (self.target.dim,):
            raise ValueError(f"map values shape {self.values.shape} does not match grid x target dim")
        if self.linear_part is not None:
            self.linear_part = np.asarray(self.linear_part, dtype=float).reshape(self.target.dim, self.geometry.n)

    @property
    def n2(self) -> int:
        return self.target.dim

    @cached_property
    def points(self) -> np.ndarray:
        if self.linear_part is None:
            return self.values
        x = np.stack(self.geometry.grid.mesh(), axis=-1)
        return self.values + np.einsum("mi,...i->...m", self.linear_part, x)

    @cached_property
    def coordinate_differential(self) -> np.ndarray:
        """``dphi[..., mu, i] = d_i phi^mu``."""
        cols = [self.geometry.d(self.values, i) for i in range(self.geometry.n)]
        out = np.stack(cols, axis=-1)
        if self.linear_part is not None:
            out = out + self.linear_part
        return out

    @cached_property
    def frame_differential(self) -> np.ndarray:
        """``phi_a = dphi(e_a)`` as ``[..., a, mu]``."""
        return np.einsum("...ai,...mi->...am", self.geometry.frame, self.coordinate_differential)

    @cached_property
    def target_metric(self) -> np.ndarray:
        return self.target(self.points)


def linear_map(geometry: Geometry, target: TargetMetric, matrix, offset=None) -> SigmaMap:
    """``phi(x) = matrix @ x + offset``; exact derivatives on any grid."""
    values = np.zeros(geometry.grid.shape + (target.dim,))
    if offset is not None:
        values = values + np.asarray(offset, dtype=float)
    return SigmaMap(geometry, values, target, np.asarray(matrix, dtype=float))


def map_energy(sm: SigmaMap) -> np.ndarray:
    """``sum_ab g1*(e^a, e^b) g2(phi_a, phi_b)`` in the orthonormal base frame."""
    eta = sm.geometry.eta
    phi = sm.frame_differential
    return np.einsum("a,...am,...mn,...an->...", eta, phi, sm.target_metric, phi)


def map_energy_coordinates(sm: SigmaMap) -> np.ndarray:
    """Same density from coordinate components ``g^ij g2(d_i phi, d_j phi)``."""
    dphi = sm.coordinate_differential
    return np.einsum("...ij,...mi,...mn,...nj->...", sm.geometry.metric.inverse, dphi, sm.target_metric, dphi)


def target_gamma_of_flat(sm: SigmaMap, module2: CliffordModule) -> np.ndarray:
    """``gamma2(phi_a^flat)`` per node and base frame index: ``[..., a, N2, N2]``."""
    coframe, eta2 = sm.target.coframe(sm.points)
    if not np.array_equal(eta2, module2.signature.eta):
        raise ValueError(f"target signature {eta2} differs from module {module2.signature.eta}")
    comps = np.einsum("...fm,...am->...af", coframe, sm.frame_differential) * eta2
    return np.einsum("...af,fkl->...akl", comps, module2.gamma)


@dataclass(eq=False)
class SigmaField:
    base_module: CliffordModule
    target_module: CliffordModule
    module: CliffordModule          # E = E1 (x) E2
    twist: BiModule                 # E' = E (x) Cl
    phi: np.ndarray                 # phi_D on E'

    @property
    def twisted(self) -> CliffordModule:
        return self.twist.as_module()

    @property
    def zero_order(self) -> np.ndarray:
        """``tau' phi_D``, the term added to the Dirac operator."""
        return self.twist.tau @ self.phi


def sigma_phi_field(sm: SigmaMap, module1: CliffordModule, module2: CliffordModule) -> SigmaField:
    """``phi_D = sum_a Id (x) gamma2(phi_a^flat) (x) R(e_a)`` on ``(E1 (x) E2) (x) Cl``."""
    if module1.n != sm.geometry.n:
        raise ValueError(f"base module dimension {module1.n} differs from base dimension {sm.geometry.n}")
    if module2.n != sm.n2:
        raise ValueError(f"target module dimension {module2.n} differs from target dimension {sm.n2}")
    E = twisted_module(module1, module2)
    twist = clifford_twist(E)
    cl = regular_module(module1.signature)
    g2 = target_gamma_of_flat(sm, module2)
    inner = dr.kron_field(module1.identity, g2)  # [..., a, N1 N2, N1 N2]
    phi = sum(dr.kron_field(inner[..., a, :, :], cl.right[a]) for a in range(module1.n))
    return SigmaField(module1, module2, E, twist, phi)


@dataclass
class ProportionalityReport:
    constant: float
    spread: float
    samples: int
    degenerate: bool
    references: dict = field(default_factory=dict)


def _ratio_report(num, den, tol=1e-14, references=None) -> ProportionalityReport:
    num = np.concatenate([np.ravel(x) for x in num])
    den = np.concatenate([np.ravel(x) for x in den])
    keep = np.abs(den) > tol
    if not keep.any():
        return ProportionalityReport(float("nan"), float("nan"), 0, True, references or {})
    ratio = num[keep] / den[keep]
    mean = float(np.mean(ratio))
    spread = float((ratio.max() - ratio.min()) / max(abs(mean), 1e-300))
    return ProportionalityReport(mean, spread, int(keep.sum()), False, references or {})


def squared_trace(field_) -> np.ndarray:
    """``tr((tau' phi_D)^2)`` node-wise, real part."""
    z = field_.zero_order
    return np.real(dr.trace(z @ z))


def sigma_norm_check(maps, module1: CliffordModule, module2: CliffordModule) -> ProportionalityReport:
    """Ratio of ``tr((tau' phi_D)^2)`` to the map energy over every node of every map."""
    num, den = [], []
    rank_prime = None
    for sm in maps:
        fld = sigma_phi_field(sm, module1, module2)
        rank_prime = fld.twisted.rank
        num.append(squared_trace(fld))
        den.append(map_energy(sm))
    n1, n2 = module1.rank, module2.rank
    eps = module1.epsilon * module2.epsilon
    refs = {
        "sum_of_ranks": n1 + n2,
        "product_of_ranks": n1 * n2,
        "twisted_rank": rank_prime,
        "predicted": -eps * rank_prime if rank_prime else float("nan"),
        "eps1_eps2": eps,
    }
    return _ratio_report(num, den, references=refs)


def pullback_connection(sm: SigmaMap, module2: CliffordModule) -> np.ndarray:
    """Levi-Civita connection of the target pulled back along the map, lifted to ``E2``.

    Returns ``W2[i, ..., N2, N2]``; identically zero for a flat target in
    Cartesian coordinates.
    """
    geo = sm.geometry
    coframe, eta2 = sm.target.coframe(sm.points)
    frame = np.swapaxes(np.linalg.inv(coframe), -1, -2)
    gam = sm.target.christoffels(sm.points)
    dphi = sm.coordinate_differential
    out = []
    for i in range(geo.n):
        dcof = _along_map(sm, i)
        cov = dcof - np.einsum("...kmv,...m,...ak->...av", gam, dphi[..., i], coframe)
        out.append(np.einsum("...av,...bv->...ab", cov, frame))
    lam = np.stack(out)
    om = -module2.epsilon * eta2[:, None] * lam
    om = 0.5 * (om - np.swapaxes(om, -1, -2))
    lift = "levi_civita" if module2.right is not None else "spinor"
    return dr.lift_spin_forms(om, module2, lift)


def _along_map(sm: SigmaMap, axis: int) -> np.ndarray:
    """``d_axis`` of the target coframe along the map, by the chain rule."""
    step = sm.target.step
    acc = 0
    for off, w in zip((-2, -1, 1, 2), (1 / 12, -8 / 12, 8 / 12, -1 / 12)):
        pts = sm.points + off * step * sm.coordinate_differential[..., axis]
        acc = acc + w * sm.target.coframe(pts)[0]
    return acc / step


def sigma_operator(sm: SigmaMap, module1: CliffordModule, module2: CliffordModule):
    """Simple-type operator on the Clifford twist with the Levi-Civita connection.

    The target factor carries the pulled-back Levi-Civita connection of the
    target metric.
    """
    fld = sigma_phi_field(sm, module1, module2)
    pull = pullback_connection(sm, module2)
    gauge = dr.kron_field(module1.identity, pull)
    conn_e = dr.build_clifford_connection(sm.geometry, fld.module, gauge=gauge, lift="spinor")
    conn = dr.twist_connection(conn_e, fld.twist)
    D = dr.build_simple_type(conn, fld.phi)
    return D, fld, conn_e


def dirac_harmonic_action(sm: SigmaMap, module1: CliffordModule, module2: CliffordModule, psi=None) -> dict:
    """Total action from the decomposition next to the closed form with the measured constant."""
    D, fld, conn_e = sigma_operator(sm, module1, module2)
    geo = sm.geometry
    dec = dr.decompose(D)
    eps1 = module1.epsilon
    rank_prime = fld.twisted.rank
    report = sigma_norm_check([sm], module1, module2)
    energy = geo.integrate(map_energy(sm))
    if psi is None:
        psi = np.zeros(geo.grid.shape + (fld.module.rank,), dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    psi_prime = fld.twist.embed(psi)
    pipeline = dr.total_dirac_action(D, psi_prime, dec)
    fermion_e = dr.fermion_action(dr.quantize_connection(conn_e), psi)
    einstein = -eps1 * rank_prime / 4 * geo.integrate(geo.scal)
    constant = 0.0 if report.degenerate else report.constant
    formula = einstein + fermion_e + constant * energy
    return {
        "pipeline": complex(pipeline),
        "formula": complex(formula),
        "fermion": complex(fermion_e),
        "fermion_twisted": complex(dr.fermion_action(D, psi_prime)),
        "einstein_hilbert": float(einstein),
        "map_energy": float(energy),
        "constant": constant,
        "references": report.references,
    }
