"""Clifford connections, Dirac operators and their canonical decompositions.

Operators are stored by their coefficient fields on the grid.  A first-order
operator is ``D = sum_i G^i d_i + C`` with ``G^i = gamma(dx^i)``; all
matrix fields carry the grid axes first and the fiber axes last, with an
extra leading axis for the coordinate direction where one is needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .geometry import Geometry, codifferential
from .modules import BiModule, CliffordModule, regular_module

SIGNS = ("adjoint", "literal")


class GaugeError(ValueError):
    """Gauge potential outside the commutant of the Clifford action."""


class DecompositionError(ValueError):
    pass


def kron_field(a, b) -> np.ndarray:
    """Node-wise Kronecker product; either factor may be a constant matrix."""
    a = np.asarray(a)
    b = np.asarray(b)
    out = np.einsum("...ij,...kl->...ikjl", a, b)
    lead = out.shape[:-4]
    return out.reshape(lead + (a.shape[-2] * b.shape[-2], a.shape[-1] * b.shape[-1]))


def matvec(mat, vec) -> np.ndarray:
    """``mat @ vec`` node by node through the compiled kernel."""
    lead = vec.shape[:-1]
    n = mat.shape[-1]
    m = np.broadcast_to(mat, lead + mat.shape[-2:]).reshape(-1, mat.shape[-2], n)
    out = kernels.node_matvec(m, vec.reshape(-1, n))
    return out.reshape(lead + (mat.shape[-2],))


def trace(field) -> np.ndarray:
    return np.trace(field, axis1=-2, axis2=-1)


def clifford_fields(geometry: Geometry, module: CliffordModule) -> np.ndarray:
    """``G[i] = gamma(dx^i) = sum_a E_a^i gamma_a``."""
    return np.einsum("...ai,akl->i...kl", geometry.frame, module.gamma)


def _check_compatible(geometry: Geometry, module: CliffordModule):
    if geometry.n != module.n:
        raise ValueError(f"module dimension {module.n} differs from chart dimension {geometry.n}")
    if not np.array_equal(geometry.eta, module.signature.eta):
        raise ValueError(f"metric signature {geometry.eta} differs from module {module.signature.eta}")


# ------------------------------------------------------------- connections

def frame_connection_forms(geometry: Geometry) -> np.ndarray:
    """``Lam[i, ..., a, b]``: ``nabla_i e^a = sum_b Lam e^b`` for the Levi-Civita connection."""
    cof = geometry.coframe
    gam = geometry.christoffel
    out = []
    for i in range(geometry.n):
        cov = geometry.d(cof, i) - np.einsum("...kj,...ak->...aj", gam[..., :, i, :], cof)
        out.append(np.einsum("...aj,...bj->...ab", cov, geometry.frame))
    return np.stack(out)


def spin_forms(geometry: Geometry, epsilon: int) -> np.ndarray:
    """Antisymmetric ``Omega[i, ..., a, b]`` with ``[1/4 Omega_ab g_a g_b, g_c] = Lam^c_d g_d``."""
    lam = frame_connection_forms(geometry)
    om = -epsilon * geometry.eta[:, None] * lam
    return 0.5 * (om - np.swapaxes(om, -1, -2))


def _bivectors(module: CliffordModule) -> np.ndarray:
    return np.einsum("akl,blm->abkm", module.gamma, module.gamma)


def lift_spin_forms(omega, module: CliffordModule, lift: str) -> np.ndarray:
    """Matrix coefficients of the lifted Levi-Civita connection."""
    if lift == "none":
        return np.zeros(omega.shape[:-2] + (module.rank, module.rank), dtype=complex)
    left = np.einsum("i...ab,abkl->i...kl", omega, _bivectors(module)) / 4
    if lift == "spinor":
        return left
    if lift == "levi_civita":
        if module.right is None:
            raise ValueError("levi_civita lift needs a left-regular module")
        rr = np.einsum("bkl,alm->abkm", module.right, module.right)
        return left - np.einsum("i...ab,abkl->i...kl", omega, rr) / 4
    raise ValueError(f"unknown lift {lift!r}")


def commutant_violation(module: CliffordModule, field) -> tuple:
    """Worst ``|[B, gamma_a]|`` over nodes and generators, with its location."""
    field = np.asarray(field)
    worst, where = 0.0, None
    for a, g in enumerate(module.gamma):
        comm = np.abs(field @ g - g @ field).max(axis=(-2, -1))
        idx = np.unravel_index(np.argmax(comm), comm.shape)
        if comm[idx] > worst:
            worst, where = float(comm[idx]), (a,) + tuple(int(i) for i in idx)
    return worst, where


@dataclass(eq=False)
class CliffordConnection:
    geometry: Geometry
    module: CliffordModule
    spin: np.ndarray
    gauge: np.ndarray
    omega: np.ndarray
    lift: str = "spinor"

    @cached_property
    def coefficients(self) -> np.ndarray:
        return self.spin + self.gauge

    @cached_property
    def gamma_fields(self) -> np.ndarray:
        return clifford_fields(self.geometry, self.module)

    def covariant_derivative(self, psi, axis: int) -> np.ndarray:
        return self.geometry.d(psi, axis) + matvec(self.coefficients[axis], psi)

    def replace(self, spin=None, gauge=None) -> "CliffordConnection":
        return CliffordConnection(self.geometry, self.module,
                                  self.spin if spin is None else spin,
                                  self.gauge if gauge is None else gauge,
                                  self.omega, self.lift)


def build_clifford_connection(geometry: Geometry, module: CliffordModule, gauge=None,
                              lift: str = "auto", tol: float = 1e-12) -> CliffordConnection:
    """Levi-Civita lift plus a commutant-valued potential ``gauge[i]``."""
    _check_compatible(geometry, module)
    if lift == "auto":
        lift = "levi_civita" if module.right is not None else "spinor"
    omega = spin_forms(geometry, module.epsilon)
    spin = lift_spin_forms(omega, module, lift)
    if gauge is None:
        gauge = np.zeros_like(spin)
    else:
        gauge = np.broadcast_to(np.asarray(gauge, dtype=complex), spin.shape).copy()
        worst, where = commutant_violation(module, gauge)
        if worst > tol:
            raise GaugeError(f"gauge potential leaves the commutant: |[A, gamma]| = {worst:.3e} "
                         f"at (generator, direction, node...) = {where}")
    return CliffordConnection(geometry, module, spin, gauge, omega, lift)


def twist_connection(conn: CliffordConnection, twist: BiModule) -> CliffordConnection:
    """Extend a connection on E to ``E (x) Cl`` with the Levi-Civita action on the Cl factor."""
    cl = regular_module(conn.module.signature)
    cl_part = lift_spin_forms(conn.omega, cl, "levi_civita")
    ident_e = conn.module.identity
    ident_cl = cl.identity
    spin = kron_field(conn.spin, ident_cl) + kron_field(ident_e, cl_part)
    gauge = kron_field(conn.gauge, ident_cl)
    return CliffordConnection(conn.geometry, twist.as_module(), spin, gauge, conn.omega, conn.lift)


@dataclass
class ConnectionReport:
    clifford_violation: float
    theta_violation: float
    tol: float

    @property
    def passed(self) -> bool:
        return max(self.clifford_violation, self.theta_violation) <= self.tol


def interior_max(geometry: Geometry, field, margin: int) -> float:
    """Max of ``|field|`` over interior nodes, reduced over any trailing axes."""
    field = np.abs(np.asarray(field))
    field = field.reshape(geometry.grid.shape + (-1,)).max(axis=-1) if field.ndim > geometry.n else field
    mask = geometry.grid.interior_mask(margin)
    return float(field[mask].max()) if mask.any() else 0.0


def default_margin(geometry: Geometry) -> int:
    """Edge band excluded from interior checks; a fixed fraction of each open axis."""
    grid = geometry.grid
    open_counts = [s for s, per in zip(grid.shape, grid.periodic) if not per]
    if not open_counts:
        return 0
    return max(2 * geometry.order, max(open_counts) // 8)


def verify_clifford_connection(conn: CliffordConnection, tol: float | None = None,
                               margin: int | None = None) -> ConnectionReport:
    """Compatibility with the Clifford map on ``dx^j`` and constancy of the canonical one-form."""
    geo = conn.geometry
    margin = default_margin(geo) if margin is None else margin
    G = conn.gamma_fields
    W = conn.coefficients
    gam = geo.christoffel
    n = geo.n
    eps = conn.module.epsilon
    theta = eps / n * np.einsum("...jk,k...ab->j...ab", geo.metric.g, G)
    cliff = 0.0
    theta_err = 0.0
    for i in range(n):
        for j in range(n):
            res = geo.d(G[j], i) + W[i] @ G[j] - G[j] @ W[i]
            res = res + np.einsum("...k,k...ab->...ab", gam[..., j, i, :], G)
            cliff = max(cliff, interior_max(geo, res, margin))
            res = geo.d(theta[j], i) + W[i] @ theta[j] - theta[j] @ W[i]
            res = res - np.einsum("...k,k...ab->...ab", gam[..., :, i, j], theta)
            theta_err = max(theta_err, interior_max(geo, res, margin))
    if tol is None:
        h = max(geo.grid.spacing)
        tol = max(1e-12, 10 * h ** geo.order)
    return ConnectionReport(cliff, theta_err, tol)


# --------------------------------------------------------------- operators

@dataclass(eq=False)
class DiracOperator:
    """``D = sum_i G^i (d_i + W_i) + Phi`` assembled on the grid."""

    connection: CliffordConnection
    phi: np.ndarray
    simple_type: bool = False
    phi_small: np.ndarray | None = None

    @property
    def geometry(self) -> Geometry:
        return self.connection.geometry

    @property
    def module(self) -> CliffordModule:
        return self.connection.module

    @property
    def gamma_fields(self) -> np.ndarray:
        return self.connection.gamma_fields

    @cached_property
    def zero_order(self) -> np.ndarray:
        G = self.gamma_fields
        W = self.connection.coefficients
        return np.einsum("i...ab,i...bc->...ac", G, W) + self.phi

    def apply(self, psi) -> np.ndarray:
        psi = np.asarray(psi, dtype=complex)
        out = matvec(self.zero_order, psi)
        for i in range(self.geometry.n):
            out = out + matvec(self.gamma_fields[i], self.geometry.d(psi, i))
        return out

    def with_zero_order(self, extra) -> "DiracOperator":
        """Add an arbitrary endomorphism field; the simple-type flag is dropped."""
        phi = self.phi + np.broadcast_to(extra, self.phi.shape)
        return DiracOperator(self.connection, phi, False, None)

    def square_coefficients(self):
        """``D^2 = P^ij d_i d_j + B^j d_j + Z`` with ``P = G^i G^j``."""
        geo = self.geometry
        G = self.gamma_fields
        C = self.zero_order
        n = geo.n
        principal = np.einsum("i...ab,j...bc->ij...ac", G, G)
        first = []
        for j in range(n):
            b = G[j] @ C + C @ G[j]
            for i in range(n):
                b = b + G[i] @ geo.d(G[j], i)
            first.append(b)
        zero = C @ C
        for i in range(n):
            zero = zero + G[i] @ geo.d(C, i)
        return principal, np.stack(first), zero


def quantize_connection(conn: CliffordConnection) -> DiracOperator:
    phi = np.zeros(conn.geometry.grid.shape + (conn.module.rank,) * 2, dtype=complex)
    return DiracOperator(conn, phi, simple_type=True, phi_small=np.zeros_like(phi))


def build_simple_type(conn: CliffordConnection, phi_small, tol: float = 1e-12) -> DiracOperator:
    """``D = quantized connection + tau phi`` with ``phi`` in the commutant."""
    module = conn.module
    shape = conn.geometry.grid.shape + (module.rank, module.rank)
    phi_small = np.broadcast_to(np.asarray(phi_small, dtype=complex), shape).copy()
    worst, where = commutant_violation(module, phi_small)
    if worst > tol:
        raise GaugeError(f"phi leaves the commutant: |[phi, gamma]| = {worst:.3e} at {where}")
    phi = module.tau @ phi_small
    anti = max(float(np.abs(phi @ g + g @ phi).max()) for g in module.gamma)
    if anti > tol:
        raise GaugeError(f"tau phi does not anticommute with gamma: {anti:.3e}")
    return DiracOperator(conn, phi, simple_type=True, phi_small=phi_small)


def symbol_residual(D: DiracOperator, f, psi) -> np.ndarray:
    """``[D, f] psi - gamma(df) psi`` node-wise."""
    geo = D.geometry
    comm = D.apply(f[..., None] * psi) - f[..., None] * D.apply(psi)
    gdf = sum(geo.d(f, i)[..., None, None] * D.gamma_fields[i] for i in range(geo.n))
    return comm - matvec(gdf, psi)


# ----------------------------------------------------------- decomposition

@dataclass(eq=False)
class Decomposition:
    operator: DiracOperator
    bochner: np.ndarray
    phi: np.ndarray
    potential: np.ndarray
    first_order_residual: np.ndarray
    sign: str

    @cached_property
    def trace_potential(self) -> np.ndarray:
        return trace(self.potential)

    @cached_property
    def dirac_form(self) -> np.ndarray:
        """``omega[i] = Theta(d_i) Phi_D = (eps/n) g_ij G^j Phi_D``."""
        D = self.operator
        geo = D.geometry
        eps = D.module.epsilon
        theta = eps / geo.n * np.einsum("...jk,k...ab->j...ab", geo.metric.g, D.gamma_fields)
        return theta @ self.phi

    @cached_property
    def dirac_connection(self) -> np.ndarray:
        return self.bochner + self.dirac_form


def extract_bochner(D: DiracOperator, sign: str = "adjoint") -> np.ndarray:
    """Bochner connection coefficients ``W^B[j]``.

    The commutator ``[D^2, x^k]`` only sees the first-order coefficient
    ``B^k`` of ``D^2``; solving the defining relation for ``f = x^k`` gives
    ``W^B_j = 1/2 g_jk (eps B^k + s delta(dx^k))``.  With ``sign='adjoint'``
    ``s = 1``, which makes the relation hold for every ``eps`` with the
    codifferential fixed as the adjoint of ``d``.  ``sign='literal'`` uses
    ``s = -eps``, the other placement of the sign.
    """
    if sign not in SIGNS:
        raise ValueError(f"sign must be one of {SIGNS}")
    geo = D.geometry
    eps = D.module.epsilon
    _, first, _ = D.square_coefficients()
    s = 1.0 if sign == "adjoint" else -eps
    codiff = geo.coordinate_codifferentials  # (..., k)
    ident = D.module.identity
    rhs = eps * first + s * np.moveaxis(codiff, -1, 0)[..., None, None] * ident
    return 0.5 * np.einsum("...jk,k...ab->j...ab", geo.metric.g, rhs)


def first_order_decomposition(D: DiracOperator, bochner) -> np.ndarray:
    """``Phi_D = D - quantized Bochner connection``, a pure endomorphism field."""
    return D.zero_order - np.einsum("i...ab,i...bc->...ac", D.gamma_fields, bochner)


def laplacian_coefficients(geo: Geometry, eps: int, W) -> tuple:
    """First- and zero-order coefficients of ``eps g^ij (nabla_i nabla_j - Gamma^k_ij nabla_k)``."""
    ginv = geo.metric.inverse
    gam = geo.christoffel
    n = geo.n
    contracted = np.einsum("...ij,...kij->...k", ginv, gam)
    ident = np.eye(W.shape[-1])
    first = eps * (2 * np.einsum("...ij,i...ab->j...ab", ginv, W)
                   - np.moveaxis(contracted, -1, 0)[..., None, None] * ident)
    zero = 0
    for i in range(n):
        for j in range(n):
            zero = zero + ginv[..., i, j, None, None] * (geo.d(W[j], i) + W[i] @ W[j])
    zero = zero - np.einsum("...k,k...ab->...ab", contracted, W)
    return first, eps * zero


def decompose(D: DiracOperator, sign: str = "adjoint") -> Decomposition:
    geo = D.geometry
    eps = D.module.epsilon
    bochner = extract_bochner(D, sign)
    phi = first_order_decomposition(D, bochner)
    _, first, zero = D.square_coefficients()
    lap_first, lap_zero = laplacian_coefficients(geo, eps, bochner)
    residual = first - lap_first
    return Decomposition(D, bochner, phi, zero - lap_zero, residual, sign)


def bochner_laplacian(dec: Decomposition, psi) -> np.ndarray:
    """``eps g^ij (nabla_i nabla_j - Gamma^k_ij nabla_k) psi`` by nested differences."""
    D = dec.operator
    geo = D.geometry
    W = dec.bochner
    ginv = geo.metric.inverse
    gam = geo.christoffel
    n = geo.n
    nab = [geo.d(psi, k) + matvec(W[k], psi) for k in range(n)]
    out = 0
    for i in range(n):
        for j in range(n):
            second = geo.d(nab[j], i) + matvec(W[i], nab[j])
            second = second - sum(gam[..., k, i, j, None] * nab[k] for k in range(n))
            out = out + ginv[..., i, j, None] * second
    return D.module.epsilon * out


def second_order_residual(dec: Decomposition, psi) -> np.ndarray:
    """``D^2 psi - Delta_B psi - V_D psi`` by composed differences."""
    D = dec.operator
    return D.apply(D.apply(psi)) - bochner_laplacian(dec, psi) - matvec(dec.potential, psi)


def quantized_dirac_connection_apply(dec: Decomposition, psi) -> np.ndarray:
    """Quantization of the Dirac connection applied to ``psi``; reproduces ``D psi``."""
    D = dec.operator
    geo = D.geometry
    W = dec.dirac_connection
    out = 0
    for i in range(geo.n):
        out = out + matvec(D.gamma_fields[i], geo.d(psi, i) + matvec(W[i], psi))
    return out


def curvature(geo: Geometry, W) -> np.ndarray:
    """``F[i, j] = d_i W_j - d_j W_i + [W_i, W_j]``."""
    n = geo.n
    F = np.zeros((n, n) + W.shape[1:], dtype=complex)
    for i in range(n):
        for j in range(i + 1, n):
            f = geo.d(W[j], i) - geo.d(W[i], j) + W[i] @ W[j] - W[j] @ W[i]
            F[i, j] = f
            F[j, i] = -f
    return F


def trace_formula_rhs(dec: Decomposition) -> np.ndarray:
    """Trace of the quantized curvature of the Dirac connection minus the form terms."""
    D = dec.operator
    geo = D.geometry
    eps = D.module.epsilon
    G = D.gamma_fields
    F = curvature(geo, dec.dirac_connection)
    n = geo.n
    curv = 0
    for i in range(n):
        for j in range(n):
            if i != j:
                curv = curv + 0.5 * trace(G[i] @ G[j] @ F[i, j])
    om = dec.dirac_form
    ginv = geo.metric.inverse
    ev = 0
    for i in range(n):
        for j in range(n):
            ev = ev + ginv[..., i, j] * trace(om[i] @ om[j])
    tr_om = np.moveaxis(trace(om), 0, -1)
    return curv - eps * ev - eps * codifferential(tr_om, geo.metric, geo.order)


def universal_dirac_action(D: DiracOperator, dec: Decomposition | None = None):
    dec = decompose(D) if dec is None else dec
    return D.geometry.integrate(dec.trace_potential)


def total_dirac_action(D: DiracOperator, psi, dec: Decomposition | None = None):
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != D.geometry.grid.shape + (D.module.rank,):
        raise ValueError(f"section shape {psi.shape} does not match fiber rank {D.module.rank}")
    dec = decompose(D) if dec is None else dec
    fermion = D.module.inner(psi, D.apply(psi))
    return D.geometry.integrate(fermion + dec.trace_potential)


def fermion_action(D: DiracOperator, psi):
    return D.geometry.integrate(D.module.inner(psi, D.apply(psi)))
