"""Gauge curvature as the zero-order part of a simple-type operator, alone and with a map."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import dirac as dr
from ..algebra import grassmann_gram
from ..geometry import ChartGrid, Geometry
from ..modules import CliffordModule, clifford_twist, regular_module, twisted_module
from .sigma import SigmaMap, _ratio_report, map_energy, target_gamma_of_flat


class CurvatureError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GaugeCurvature:
    """``F[..., a, b]``: curvature matrices on an orthonormal base frame."""

    values: np.ndarray

    def __post_init__(self):
        F = np.asarray(self.values, dtype=complex)
        if F.ndim < 4 or F.shape[-4] != F.shape[-3] or F.shape[-2] != F.shape[-1]:
            raise CurvatureError(f"curvature must end in (n, n, r, r), got {F.shape}")
        if not np.array_equal(F, -np.swapaxes(F, -4, -3)):
            sym = 0.5 * (F + np.swapaxes(F, -4, -3))
            raise CurvatureError(f"curvature is not antisymmetric in the form indices "
                                 f"(symmetric part {np.abs(sym).max():.3e})")
        object.__setattr__(self, "values", F)

    @property
    def n(self) -> int:
        return self.values.shape[-3]

    @property
    def rank(self) -> int:
        return self.values.shape[-1]

    def scaled(self, factor) -> "GaugeCurvature":
        return GaugeCurvature(factor * self.values)


def constant_u1_flux(grid: ChartGrid, flux: float) -> GaugeCurvature:
    """``F_12 = i f`` on a rank-one bundle; on a torus it has no periodic potential."""
    F = np.zeros(grid.shape + (grid.n, grid.n, 1, 1), dtype=complex)
    F[..., 0, 1, 0, 0] = 1j * flux
    F[..., 1, 0, 0, 0] = -1j * flux
    return GaugeCurvature(F)


def sinusoidal_u1_potential(grid: ChartGrid, amplitude: float, wave: int = 1) -> np.ndarray:
    """Periodic potential ``A = i a sin(k x) dy`` with curvature ``i a k cos(k x) dx^dy``."""
    x = grid.mesh()[0]
    A = np.zeros((grid.n,) + grid.shape + (1, 1), dtype=complex)
    A[1, ..., 0, 0] = 1j * amplitude * np.sin(wave * x)
    return A


def curvature_from_potential(geo: Geometry, potential) -> GaugeCurvature:
    """Difference curvature of ``d + A`` moved to the orthonormal frame."""
    Fc = dr.curvature(geo, np.asarray(potential, dtype=complex))  # [i, j, ..., r, r]
    F = np.einsum("...ai,...bj,ij...kl->...abkl", geo.frame, geo.frame, Fc)
    F = 0.5 * (F - np.swapaxes(F, -4, -3))
    return GaugeCurvature(F)


def curvature_norm(F: GaugeCurvature, eta) -> np.ndarray:
    """``-sum_ab eta_aa eta_bb tr(F_ab F_ab)`` node-wise, real part."""
    vals = F.values
    ff = np.einsum("...abij,...abji->...ab", vals, vals)
    return -np.real(np.einsum("a,b,...ab->...", eta, eta, ff))


def _embed_curvature(F: GaugeCurvature, spinor: CliffordModule, module2: CliffordModule, F2=None):
    """Twisting curvature on ``E = (S (x) W) (x) E2`` in frame components."""
    ident_s = spinor.identity
    ident_2 = module2.identity
    out = dr.kron_field(dr.kron_field(ident_s, F.values), ident_2)
    if F2 is not None:
        ident_1 = np.eye(spinor.rank * F.rank)
        out = out + dr.kron_field(ident_1, np.asarray(F2, dtype=complex))
    return out


@dataclass(eq=False)
class GaugeField:
    spinor: CliffordModule
    module2: CliffordModule
    module: CliffordModule
    twist: object
    phi: np.ndarray
    twisting_curvature: np.ndarray

    @property
    def twisted(self) -> CliffordModule:
        return self.twist.as_module()

    @property
    def zero_order(self) -> np.ndarray:
        return self.twist.tau @ self.phi


def ym_phi_field(F: GaugeCurvature, spinor: CliffordModule, module2: CliffordModule, F2=None) -> GaugeField:
    """``chi_a = sum_b F_A(e_a, e_b) gamma2(e^b)`` and ``phi_D = sum_a chi_a (x) R(e_a)``.

    ``F`` lives on the gauge bundle ``W`` and enters as ``Id_S (x) F``;
    ``F2`` is an optional curvature on ``E2`` itself.
    """
    n = spinor.n
    if F.n != n or module2.n != n:
        raise ValueError("curvature, spinor module and second module must share the base dimension")
    E1 = twisted_module(spinor, (F.rank, None, None))
    E = twisted_module(E1, module2)
    twist = clifford_twist(E)
    cl = regular_module(spinor.signature)
    FA = _embed_curvature(F, spinor, module2, F2)
    gam2 = dr.kron_field(np.eye(E1.rank), module2.gamma)  # [b, N, N]
    chi = np.einsum("...abkl,blm->...akm", FA, gam2)
    phi = sum(dr.kron_field(chi[..., a, :, :], cl.right[a]) for a in range(n))
    return GaugeField(spinor, module2, E, twist, phi, FA)


def ym_norm_check(F: GaugeCurvature, spinor: CliffordModule, module2: CliffordModule, eta, F2=None):
    """Ratio of ``tr((tau' phi_D)^2)`` to the curvature norm traced over ``W`` and over ``E``."""
    fld = ym_phi_field(F, spinor, module2, F2)
    z = fld.zero_order
    num = np.real(dr.trace(z @ z))
    norm_e = curvature_norm(GaugeCurvature(fld.twisting_curvature), eta)
    eps = spinor.epsilon * module2.epsilon
    n = spinor.n
    refs = {"eps1_eps2": eps, "predicted_over_E": (2 ** n) * eps,
            "rank_E": fld.module.rank, "rank_twisted": fld.twisted.rank}
    over_e = _ratio_report([num], [norm_e], references=refs)
    over_w = _ratio_report([num], [curvature_norm(F, eta)], references=refs) if F2 is None else None
    return over_e, over_w, fld


def _gauge_on(module: CliffordModule, potential, spinor: CliffordModule, module2: CliffordModule):
    """``Id_S (x) A (x) Id_2`` per direction."""
    if potential is None:
        return None
    A = np.asarray(potential, dtype=complex)
    return dr.kron_field(dr.kron_field(spinor.identity, A), module2.identity)


def ym_action(F: GaugeCurvature, geometry: Geometry, spinor: CliffordModule, module2: CliffordModule,
              potential=None) -> dict:
    """Closed form with the measured constant next to the universal action of the assembled operator.

    ``potential`` is the gauge potential on ``W``; with ``None`` the operator
    uses the trivial one, which the universal action does not see on a flat
    base because it depends on the zero-order part only.
    """
    over_e, over_w, fld = ym_norm_check(F, spinor, module2, geometry.eta)
    gauge = _gauge_on(fld.module, potential, spinor, module2)
    conn_e = dr.build_clifford_connection(geometry, fld.module, gauge=gauge, lift="spinor")
    conn = dr.twist_connection(conn_e, fld.twist)
    D = dr.build_simple_type(conn, fld.phi)
    dec = dr.decompose(D)
    universal = dr.universal_dirac_action(D, dec)
    eps1 = spinor.epsilon
    rank_prime = fld.twisted.rank
    einstein = -eps1 * rank_prime / 4 * geometry.integrate(geometry.scal)
    norm_e = geometry.integrate(curvature_norm(GaugeCurvature(fld.twisting_curvature), geometry.eta))
    norm_w = geometry.integrate(curvature_norm(F, geometry.eta))
    c = 0.0 if over_e.degenerate else over_e.constant
    return {
        "universal": complex(universal),
        "formula": float(einstein + c * norm_e),
        "einstein_hilbert": float(einstein),
        "norm_E": float(norm_e),
        "norm_W": float(norm_w),
        "constant_E": c,
        "constant_W": None if over_w is None or over_w.degenerate else over_w.constant,
        "references": over_e.references,
    }


def twisted_spinor_action(F: GaugeCurvature, geometry: Geometry, spinor: CliffordModule, psi=None,
                          potential=None) -> dict:
    """Fermion, Einstein-Hilbert and Yang-Mills terms with ``E2 = Cl`` and no curvature on it."""
    cl2 = regular_module(spinor.signature)
    over_e, over_w, fld = ym_norm_check(F, spinor, cl2, geometry.eta)
    gauge = _gauge_on(fld.module, potential, spinor, cl2)
    # the Cl factor of E carries its own Levi-Civita action
    conn_e = dr.build_clifford_connection(geometry, fld.module, gauge=None, lift="spinor")
    cl_part = dr.lift_spin_forms(conn_e.omega, cl2, "levi_civita")
    extra = dr.kron_field(np.eye(spinor.rank * F.rank), cl_part)
    if gauge is not None:
        extra = extra + gauge
    conn_e = conn_e.replace(gauge=extra)
    conn = dr.twist_connection(conn_e, fld.twist)
    D = dr.build_simple_type(conn, fld.phi)
    dec = dr.decompose(D)
    e1_rank = spinor.rank * F.rank
    if psi is None:
        psi = np.zeros(geometry.grid.shape + (e1_rank,), dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    # z -> z (x) 1 (x) 1
    unit2 = np.zeros(cl2.rank)
    unit2[0] = 1.0
    psi_e = np.einsum("...i,j->...ij", psi, unit2).reshape(psi.shape[:-1] + (fld.module.rank,))
    psi_prime = fld.twist.embed(psi_e)
    total = dr.total_dirac_action(D, psi_prime, dec)
    conn1 = dr.build_clifford_connection(
        geometry, twisted_module(spinor, (F.rank, None, None)),
        gauge=None if potential is None else dr.kron_field(spinor.identity, np.asarray(potential, dtype=complex)),
        lift="spinor")
    fermion = dr.fermion_action(dr.quantize_connection(conn1), psi)
    einstein = -spinor.epsilon * fld.twisted.rank / 4 * geometry.integrate(geometry.scal)
    norm_w = geometry.integrate(curvature_norm(F, geometry.eta))
    ym = dr.universal_dirac_action(D, dec) - einstein
    n = spinor.n
    return {
        "total": complex(total),
        "fermion": complex(fermion),
        "einstein_hilbert": float(einstein),
        "yang_mills": complex(ym),
        "norm_W": float(norm_w),
        "measured_factor": None if over_w is None or over_w.degenerate else over_w.constant,
        "stated_factor": (2 ** n) * spinor.rank * spinor.epsilon * cl2.epsilon,
    }


# ------------------------------------------------------------------- DHYM

@dataclass(eq=False)
class CompositeField:
    module1: CliffordModule
    module: CliffordModule
    twist: object
    phi_map: np.ndarray
    phi_gauge: np.ndarray

    @property
    def twisted(self) -> CliffordModule:
        return self.twist.as_module()

    def zero_order(self, which="both") -> np.ndarray:
        phi = {"map": self.phi_map, "gauge": self.phi_gauge, "both": self.phi_map + self.phi_gauge}[which]
        return self.twist.tau @ phi


def spinor_cl_gauge_module(spinor: CliffordModule, gauge_rank: int) -> CliffordModule:
    """``S (x) Cl (x) W`` with the Clifford action on ``S`` only."""
    cl = regular_module(spinor.signature)
    ident_w = np.eye(gauge_rank)
    gamma = np.array([np.kron(np.kron(g, cl.identity), ident_w) for g in spinor.gamma])
    tau = np.kron(np.kron(spinor.tau, cl.tau), ident_w)
    h = np.kron(np.kron(spinor.h, grassmann_gram(spinor.signature)), ident_w)
    return CliffordModule(spinor.signature, gamma, tau, h, name=f"{spinor.name}*Cl*W{gauge_rank}",
                          factors=(spinor, cl, gauge_rank))


def dhym_field(sm: SigmaMap, F: GaugeCurvature, spinor: CliffordModule, module2: CliffordModule) -> CompositeField:
    """Map part and gauge part of the zero-order field on ``(S (x) Cl (x) W (x) E2) (x) Cl``."""
    n = spinor.n
    if F.n != n or sm.geometry.n != n:
        raise ValueError("map, curvature and spinor module must share the base dimension")
    E1 = spinor_cl_gauge_module(spinor, F.rank)
    E = twisted_module(E1, module2)
    twist = clifford_twist(E)
    cl = regular_module(spinor.signature)
    g2 = target_gamma_of_flat(sm, module2)
    inner = dr.kron_field(E1.identity, g2)
    phi_map = sum(dr.kron_field(inner[..., b, :, :], cl.right[b]) for b in range(n))
    phi_gauge = 0
    for a in range(n):
        left = dr.kron_field(spinor.identity, cl.gamma[a])
        for b in range(n):
            fab = dr.kron_field(dr.kron_field(left, F.values[..., a, b, :, :]), module2.identity)
            phi_gauge = phi_gauge + dr.kron_field(fab, cl.right[b])
    return CompositeField(E1, E, twist, phi_map, phi_gauge)


def dhym_report(sm: SigmaMap, F: GaugeCurvature, spinor: CliffordModule, module2: CliffordModule) -> dict:
    """Cross-trace check and the split of the universal action into map, gauge and curvature parts."""
    fld = dhym_field(sm, F, spinor, module2)
    geo = sm.geometry
    z1 = fld.zero_order("map")
    z2 = fld.zero_order("gauge")
    cross = dr.trace(fld.phi_map @ fld.phi_gauge + fld.phi_gauge @ fld.phi_map)
    conn_e = dr.build_clifford_connection(geo, fld.module, lift="spinor")
    conn = dr.twist_connection(conn_e, fld.twist)
    D = dr.build_simple_type(conn, fld.phi_map + fld.phi_gauge)
    dec = dr.decompose(D)
    total = dr.universal_dirac_action(D, dec)
    map_part = geo.integrate(np.real(dr.trace(z1 @ z1)))
    gauge_part = geo.integrate(np.real(dr.trace(z2 @ z2)))
    einstein = -spinor.epsilon * fld.twisted.rank / 4 * geo.integrate(geo.scal)
    energy = geo.integrate(map_energy(sm))
    norm_w = geo.integrate(curvature_norm(F, geo.eta))
    return {
        "cross_trace_max": float(np.abs(cross).max()),
        "total": complex(total),
        "map_part": float(map_part),
        "gauge_part": float(gauge_part),
        "einstein_hilbert": float(einstein),
        "sum_of_parts": float(map_part + gauge_part + einstein),
        "map_constant": map_part / energy if energy else float("nan"),
        "gauge_constant": gauge_part / norm_w if norm_w else float("nan"),
        "rank_E1": fld.module1.rank,
        "rank_twisted": fld.twisted.rank,
    }
