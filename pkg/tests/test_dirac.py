import math

import numpy as np
import pytest

from dirac_forge import dirac as dr
from dirac_forge.algebra import Signature
from dirac_forge.geometry import ChartGrid, Geometry, flat_metric, sphere_cap_grid, sphere_metric
from dirac_forge.modules import pauli_module, regular_module, study_module
from dirac_forge.suites import fit_order

EPS = [1, -1]


def torus(nodes=32, order=2):
    return Geometry(flat_metric(ChartGrid.torus((nodes, nodes))), order=order)


def sphere(nodes=64, order=2):
    return Geometry(sphere_metric(sphere_cap_grid(nodes, nodes)), order=order)


def smooth_section(geo, rank, seed=0):
    """A smooth complex section built from low-frequency trig modes with random weights."""
    rng = np.random.default_rng(seed)
    coords = geo.grid.mesh()
    out = np.zeros(geo.grid.shape + (rank,), dtype=complex)
    for k in range(rank):
        w = rng.normal(size=(3, len(coords))) + 1j * rng.normal(size=(3, len(coords)))
        for row in w:
            out[..., k] += row[0] * np.cos(coords[0]) + row[-1] * np.sin(coords[-1] + k)
    return out


# ------------------------------------------------------------- connections

@pytest.mark.parametrize("eps", EPS)
def test_flat_connection_is_plain_derivative(eps):
    geo = torus(16)
    conn = dr.build_clifford_connection(geo, pauli_module(epsilon=eps))
    assert np.abs(conn.coefficients).max() < 1e-14
    psi = smooth_section(geo, 2)
    assert np.array_equal(conn.covariant_derivative(psi, 0), geo.d(psi, 0))


def test_sphere_frame_connection_forms():
    geo = sphere(256, order=4)
    lam = dr.frame_connection_forms(geo)
    theta = geo.grid.mesh()[0]
    expect = np.zeros_like(lam)
    expect[1, ..., 0, 1] = np.cos(theta)
    expect[1, ..., 1, 0] = -np.cos(theta)
    assert dr.interior_max(geo, lam - expect, dr.default_margin(geo)) < 1e-6


@pytest.mark.parametrize("eps", EPS)
def test_spin_lift_reproduces_frame_rotation(eps):
    geo = sphere(32, order=4)
    module = pauli_module(epsilon=eps)
    conn = dr.build_clifford_connection(geo, module)
    lam = dr.frame_connection_forms(geo)
    # the lift sees the antisymmetric part; the discrete forms are antisymmetric only up to O(h^order)
    lam = 0.5 * (lam - np.swapaxes(lam, -1, -2))
    for i in range(2):
        for c in range(2):
            comm = conn.spin[i] @ module.gamma[c] - module.gamma[c] @ conn.spin[i]
            rot = np.einsum("...d,dkl->...kl", lam[i, ..., c, :], module.gamma)
            assert np.abs(comm - rot).max() < 1e-12


def test_abelian_gauge_is_accepted():
    geo = torus(16)
    x = geo.grid.mesh()[0]
    gauge = 1j * np.sin(x)[None, ..., None, None] * np.eye(2)
    conn = dr.build_clifford_connection(geo, pauli_module(), gauge=np.broadcast_to(gauge, (2,) + gauge.shape[1:]))
    assert np.allclose(conn.gauge[0], 1j * np.sin(x)[..., None, None] * np.eye(2))


def test_non_commutant_gauge_is_rejected():
    module = pauli_module()
    with pytest.raises(dr.GaugeError, match="commutant"):
        dr.build_clifford_connection(torus(16), module, gauge=module.gamma[0])


@pytest.mark.parametrize("eps", EPS)
def test_connection_compatibility(eps):
    flat = dr.verify_clifford_connection(dr.build_clifford_connection(torus(16), pauli_module(epsilon=eps)))
    assert flat.clifford_violation < 1e-12 and flat.theta_violation < 1e-12
    conn = dr.build_clifford_connection(sphere(256, order=4), pauli_module(epsilon=eps))
    rep = dr.verify_clifford_connection(conn)
    assert rep.clifford_violation < 1e-5 and rep.theta_violation < 1e-5
    broken = dr.verify_clifford_connection(conn.replace(spin=1.5 * conn.spin))
    assert broken.clifford_violation > 0.1 and not broken.passed


# ---------------------------------------------------------------- operators

def test_study_operator_on_interval():
    geo = Geometry(flat_metric(ChartGrid.interval(201, 0.0, 1.0)), order=4)
    D = dr.quantize_connection(dr.build_clifford_connection(geo, study_module()))
    t = geo.grid.axis_coords(0)
    psi = np.stack([np.sin(3 * t), np.exp(t)], axis=-1)
    expect = np.stack([3 * np.cos(3 * t), -np.exp(t)], axis=-1)
    assert np.abs(D.apply(psi) - expect)[8:-8].max() < 1e-6


def test_constant_section_is_annihilated():
    geo = torus(16)
    D = dr.quantize_connection(dr.build_clifford_connection(geo, pauli_module()))
    psi = np.broadcast_to(np.array([1.0 + 2j, -0.5]), geo.grid.shape + (2,))
    assert np.abs(D.apply(psi)).max() < 1e-14


@pytest.mark.parametrize("eps", EPS)
def test_symbol_residual_converges(eps):
    errs = []
    for nodes in (32, 64):
        geo = torus(nodes)
        D = dr.quantize_connection(dr.build_clifford_connection(geo, pauli_module(epsilon=eps)))
        x, y = geo.grid.mesh()
        f = np.sin(x + 2 * y)
        errs.append(np.abs(dr.symbol_residual(D, f, smooth_section(geo, 2))).max())
    assert abs(math.log2(errs[0] / errs[1]) - 2) < 0.3


@pytest.mark.parametrize("eps", EPS)
def test_simple_type_anticommutes(eps):
    module = pauli_module(epsilon=eps)
    conn = dr.build_clifford_connection(torus(16), module)
    D = dr.build_simple_type(conn, 0.7 * module.identity)
    assert np.allclose(D.phi, 0.7 * module.tau)
    for g in module.gamma:
        assert np.abs(D.phi @ g + g @ D.phi).max() < 1e-12
    zero = dr.build_simple_type(conn, 0 * module.identity)
    assert np.array_equal(zero.zero_order, dr.quantize_connection(conn).zero_order)
    with pytest.raises(dr.GaugeError):
        dr.build_simple_type(conn, module.gamma[0])


# ------------------------------------------------------------ decomposition

@pytest.mark.parametrize("eps", EPS)
def test_bochner_connection_of_simple_type(eps):
    conn_errs, phi_errs = [], []
    sizes = (64, 128, 256)
    for nodes in sizes:
        geo = sphere(nodes)
        module = pauli_module(epsilon=eps)
        conn = dr.build_clifford_connection(geo, module)
        theta = geo.grid.mesh()[0]
        dec = dr.decompose(dr.build_simple_type(conn, (0.5 + 0.2 * np.cos(theta))[..., None, None] * module.identity))
        margin = dr.default_margin(geo)
        conn_errs.append(dr.interior_max(geo, dec.bochner - conn.coefficients, margin))
        expect_phi = module.tau * (0.5 + 0.2 * np.cos(theta))[..., None, None]
        phi_errs.append(dr.interior_max(geo, dec.phi - expect_phi, margin))
    for errs in (conn_errs, phi_errs):
        assert errs[-1] < 1e-2
        assert abs(fit_order(sizes, errs) - 2) < 0.3


def test_flat_bochner_and_potential_vanish():
    for eps in EPS:
        dec = dr.decompose(dr.quantize_connection(dr.build_clifford_connection(torus(16), pauli_module(epsilon=eps))))
        assert np.abs(dec.bochner).max() < 1e-10
        assert np.abs(dec.phi).max() < 1e-10
        assert np.abs(dec.potential).max() < 1e-10


@pytest.mark.parametrize("eps", EPS)
def test_non_commutant_zero_order_term_is_recovered(eps):
    geo = sphere(32)
    module = pauli_module(epsilon=eps)
    conn = dr.build_clifford_connection(geo, module)
    rng = np.random.default_rng(5)
    theta, phi = geo.grid.mesh()
    coeff = rng.normal() + 1j * rng.normal() + np.sin(theta) * np.cos(phi)
    extra = coeff[..., None, None] * (module.gamma[0] @ module.gamma[1])
    base = dr.decompose(dr.quantize_connection(conn))
    dec = dr.decompose(dr.quantize_connection(conn).with_zero_order(extra))
    # the extraction is linear, so the added term comes back on top of the discretization remainder
    assert np.abs(dec.phi - base.phi - extra).max() < 1e-12
    assert np.abs(dec.bochner - base.bochner).max() < 1e-12


@pytest.mark.parametrize("eps", EPS)
def test_dirac_connection_reproduces_operator(eps):
    geo = sphere(48)
    module = pauli_module(epsilon=eps)
    D = dr.build_simple_type(dr.build_clifford_connection(geo, module), 0.8 * module.identity)
    dec = dr.decompose(D)
    psi = smooth_section(geo, 2, seed=2)
    assert np.abs(dr.quantized_dirac_connection_apply(dec, psi) - D.apply(psi)).max() < 1e-10
    pure = dr.decompose(dr.quantize_connection(dr.build_clifford_connection(torus(16), module)))
    assert np.abs(pure.dirac_connection - pure.bochner).max() < 1e-12


@pytest.mark.parametrize("eps", EPS)
def test_dirac_form_of_constant_mass(eps):
    geo = torus(16)
    module = pauli_module(epsilon=eps)
    m = 0.6
    dec = dr.decompose(dr.build_simple_type(dr.build_clifford_connection(geo, module), m * module.identity))
    for a in range(2):
        expect = eps / 2 * module.gamma[a] @ module.tau * m
        assert np.abs(dec.dirac_form[a] - expect).max() < 1e-12


# ------------------------------------------------------------ Laplacian

@pytest.mark.parametrize("eps", EPS)
def test_flat_bochner_laplacian(eps):
    geo = torus(128, order=4)
    dec = dr.decompose(dr.quantize_connection(dr.build_clifford_connection(geo, pauli_module(epsilon=eps))))
    x = geo.grid.mesh()[0]
    v = np.array([1.0, 2.0 - 1j])
    psi = np.sin(x)[..., None] * v
    assert np.abs(dr.bochner_laplacian(dec, psi) + eps * psi).max() < 1e-5
    const = np.broadcast_to(v, psi.shape)
    assert np.abs(dr.bochner_laplacian(dec, const)).max() < 1e-12


@pytest.mark.parametrize("eps", EPS)
def test_sphere_bochner_laplacian_on_first_harmonic(eps):
    # the scalar blade of the Clifford bundle is parallel, so it carries the scalar Laplacian
    geo = sphere(128, order=4)
    module = regular_module(Signature(2, 0, eps))
    dec = dr.decompose(dr.quantize_connection(dr.build_clifford_connection(geo, module)))
    theta = geo.grid.mesh()[0]
    psi = np.zeros(geo.grid.shape + (4,), dtype=complex)
    psi[..., 0] = np.cos(theta)
    err = dr.interior_max(geo, dr.bochner_laplacian(dec, psi) + 2 * eps * psi, dr.default_margin(geo))
    assert err < 1e-3


# ------------------------------------------------------------ potential

@pytest.mark.parametrize("eps", EPS)
def test_sphere_trace_potential_is_scalar_curvature_term(eps):
    geo = sphere(128, order=4)
    dec = dr.decompose(dr.quantize_connection(dr.build_clifford_connection(geo, pauli_module(epsilon=eps))))
    assert dr.interior_max(geo, dec.trace_potential + eps * 2 / 4 * 2, dr.default_margin(geo)) < 1e-3


@pytest.mark.parametrize("eps", EPS)
def test_flat_trace_potential_of_constant_mass(eps):
    geo = torus(16)
    module = pauli_module(epsilon=eps)
    m = 1.3
    dec = dr.decompose(dr.build_simple_type(dr.build_clifford_connection(geo, module), m * module.identity))
    assert np.abs(dec.trace_potential - 2 * m * m).max() < 1e-10
    # constant masses give a node-independent potential
    assert np.ptp(dec.trace_potential.real) < 1e-12
    assert np.abs(dr.trace_formula_rhs(dec) - dec.trace_potential).max() < 1e-8


@pytest.mark.parametrize("eps", EPS)
def test_second_order_consistency(eps):
    errs = []
    for nodes in (64, 128):
        geo = sphere(nodes)
        module = pauli_module(epsilon=eps)
        theta = geo.grid.mesh()[0]
        D = dr.build_simple_type(dr.build_clifford_connection(geo, module),
                                 (0.4 + 0.1 * np.cos(theta))[..., None, None] * module.identity)
        dec = dr.decompose(D)
        res = dr.second_order_residual(dec, smooth_section(geo, 2, seed=3))
        errs.append(dr.interior_max(geo, res, dr.default_margin(geo)))
    assert abs(math.log2(errs[0] / errs[1]) - 2) < 0.3


@pytest.mark.parametrize("eps", EPS)
def test_integrated_trace_formula_with_varying_mass(eps):
    geo = torus(64)
    module = pauli_module(epsilon=eps)
    x, y = geo.grid.mesh()
    mass = (0.7 + 0.3 * np.sin(x) * np.cos(y))[..., None, None] * module.identity
    dec = dr.decompose(dr.build_simple_type(dr.build_clifford_connection(geo, module), mass))
    lhs = geo.integrate(dec.trace_potential)
    rhs = geo.integrate(dr.trace_formula_rhs(dec))
    assert abs(lhs - rhs) < 1e-6


def test_literal_sign_differs_only_for_positive_epsilon():
    for eps in EPS:
        geo = sphere(64)
        D = dr.quantize_connection(dr.build_clifford_connection(geo, pauli_module(epsilon=eps)))
        adjoint = dr.decompose(D, "adjoint").trace_potential
        literal = dr.decompose(D, "literal").trace_potential
        gap = dr.interior_max(geo, adjoint - literal, dr.default_margin(geo))
        assert (gap > 0.1) if eps == 1 else (gap < 1e-12)
    with pytest.raises(ValueError):
        dr.decompose(D, "other")


# -------------------------------------------------------------- actions

@pytest.mark.parametrize("eps", EPS)
def test_universal_action_examples(eps):
    geo = torus(32)
    module = pauli_module(epsilon=eps)
    conn = dr.build_clifford_connection(geo, module)
    assert abs(dr.universal_dirac_action(dr.quantize_connection(conn))) < 1e-9
    m = 0.9
    D = dr.build_simple_type(conn, m * module.identity)
    assert abs(dr.universal_dirac_action(D) - 4 * math.pi**2 * 2 * m * m) < 1e-8


def test_total_action_examples():
    geo = torus(32)
    module = pauli_module()
    D = dr.build_simple_type(dr.build_clifford_connection(geo, module), 0.5 * module.identity)
    zero = np.zeros(geo.grid.shape + (2,))
    assert dr.total_dirac_action(D, zero) == dr.universal_dirac_action(D)
    plain = dr.quantize_connection(dr.build_clifford_connection(geo, module))
    const = np.broadcast_to(np.array([1.0, 1j]), zero.shape)
    assert abs(dr.fermion_action(plain, const)) < 1e-12
    with pytest.raises(ValueError):
        dr.total_dirac_action(D, np.zeros(geo.grid.shape + (3,)))
