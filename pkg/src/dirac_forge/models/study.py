"""The one-dimensional base with the Study-number module: curves and their energy."""

from __future__ import annotations

import numpy as np

from .. import dirac as dr
from ..algebra import Signature
from ..geometry import ChartGrid, Geometry, flat_metric
from ..modules import regular_module, study_module, twisted_module
from .geodesic import geodesic_energy, great_circle_path
from .sigma import SigmaMap, map_energy, pullback_connection, sigma_operator, sigma_phi_field, squared_trace
from .target import sphere_target


def interval_geometry(nodes: int) -> Geometry:
    return Geometry(flat_metric(ChartGrid.interval(nodes, 0.0, 1.0)), order=4)


def study_dirac_demo(nodes: int = 257, epsilon: int = 1, distance: float = 1.0) -> dict:
    """Checks on ``[0, 1]`` with the Study module; each entry is ``(value, reference, tolerance)``."""
    geo = interval_geometry(nodes)
    t = geo.grid.axis_coords(0)
    study = study_module(epsilon)
    D = dr.quantize_connection(dr.build_clifford_connection(geo, study))
    h = geo.grid.spacing[0]
    checks = {}

    psi = np.stack([np.sin(t), np.cos(t)], axis=-1).astype(complex)
    expect = np.stack([np.cos(t), np.sin(t)], axis=-1) * (1 if epsilon == 1 else 1j)
    checks["study-trig-section"] = (float(np.abs(D.apply(psi) - expect).max()), 0.0, 10 * h ** 2)
    const = np.ones((nodes, 2), dtype=complex)
    checks["study-constant-section"] = (float(np.abs(D.apply(const)).max()), 0.0, 1e-12)

    # curve on the unit sphere, exterior-algebra fiber with the pulled-back connection
    target = sphere_target()
    path = great_circle_path(distance, nodes)
    sm = SigmaMap(geo, path, target)
    cl2 = regular_module(Signature(2, 0, epsilon, warn=False))
    pull = pullback_connection(sm, cl2)
    conn = dr.build_clifford_connection(
        geo, twisted_module(study, cl2), gauge=dr.kron_field(study.identity, pull), lift="spinor")
    Dc = dr.quantize_connection(conn)
    rng = np.random.default_rng(7)
    coeffs = rng.normal(size=(3, 2 * cl2.rank))
    psi = (coeffs[0] + np.outer(np.sin(3 * t), coeffs[1]) + np.outer(t ** 2, coeffs[2])).astype(complex)
    direct = _direct_study_operator(geo, psi, pull[0], cl2.rank) * (1 if epsilon == 1 else 1j)
    checks["study-pullback-operator"] = (float(np.abs(Dc.apply(psi) - direct).max()), 0.0, 1e-12)

    # the universal action of the sigma operator reduces to the curve energy
    fld = sigma_phi_field(sm, study, cl2)
    density = squared_trace(fld)
    energy_density = map_energy(sm)
    ratio = density / energy_density
    constant = float(np.mean(ratio))
    checks["study-action-density-spread"] = (float(np.ptp(ratio) / abs(constant)), 0.0, 1e-10)
    reduced = float(np.real(geo.integrate(density))) / constant
    checks["study-energy-vs-discrete"] = (reduced, geodesic_energy(path, target), 1e-6)
    checks["study-energy-vs-closed-form"] = (reduced, distance ** 2, 1e-6)

    # the fermion term and curve energy of the total action
    _, fld_s, conn_e = sigma_operator(sm, study, cl2)
    psi_e = rng.normal(size=(nodes, fld_s.module.rank)) * np.sin(np.pi * t)[:, None]
    fermion = dr.fermion_action(dr.quantize_connection(conn_e), psi_e.astype(complex))
    energy = float(np.real(geo.integrate(energy_density)))
    checks["study-total-action"] = (complex(fermion + energy), complex(fermion + distance ** 2), 1e-6)
    checks["study-constant"] = (constant, -epsilon * epsilon * fld.twisted.rank, 1e-12)
    return checks


def _direct_study_operator(geo, psi, pull, rank):
    """``(alpha' + G alpha, -beta' - G beta)`` written out by components."""
    alpha, beta = psi[:, :rank], psi[:, rank:]
    da = geo.d(alpha, 0) + np.einsum("tij,tj->ti", pull, alpha)
    db = geo.d(beta, 0) + np.einsum("tij,tj->ti", pull, beta)
    return np.concatenate([da, -db], axis=-1)
