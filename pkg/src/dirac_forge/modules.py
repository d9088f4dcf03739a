"""Matrix Clifford modules, the quantization map and the twist constructions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .algebra import (
    ExteriorElement,
    Multivector,
    Signature,
    SignatureError,
    grassmann_gram,
    inverse_symbol_map,
    left_multiplication_matrix,
    right_multiplication_matrix,
)

TOL = 1e-12

_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def _adjoint(mat, h):
    """Adjoint with respect to the hermitian form ``<x, y> = x^H h y``."""
    return np.linalg.solve(h, mat.conj().T @ h)


def _hermiticity(mat, h, tol=TOL):
    adj = _adjoint(mat, h)
    if np.max(np.abs(adj - mat)) <= tol:
        return "hermitian"
    if np.max(np.abs(adj + mat)) <= tol:
        return "anti-hermitian"
    return "neither"


@dataclass(frozen=True, eq=False)
class CliffordModule:
    """Finite-dimensional (odd hermitian) Clifford module given by matrices.

    ``gamma[a]`` represents the orthonormal covector ``e^a``.  ``right`` is
    set for left-regular modules and holds right multiplication by ``e_a``;
    ``algebra_signature`` then names the algebra the fiber is made of.
    """

    signature: Signature
    gamma: np.ndarray
    tau: np.ndarray
    h: np.ndarray
    name: str = "custom"
    right: np.ndarray | None = None
    algebra_signature: Signature | None = None
    factors: tuple = field(default=())

    def __post_init__(self):
        gamma = np.asarray(self.gamma, dtype=complex)
        if gamma.ndim != 3 or gamma.shape[0] != self.signature.n or gamma.shape[1] != gamma.shape[2]:
            raise ValueError(f"gamma must have shape ({self.signature.n}, N, N), got {gamma.shape}")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "tau", np.asarray(self.tau, dtype=complex))
        object.__setattr__(self, "h", np.asarray(self.h, dtype=complex))

    @property
    def rank(self) -> int:
        return self.gamma.shape[1]

    @property
    def n(self) -> int:
        return self.signature.n

    @property
    def epsilon(self) -> int:
        return self.signature.epsilon

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.rank, dtype=complex)

    def gamma_of(self, covector) -> np.ndarray:
        """``gamma(alpha)`` for orthonormal components; leading axes broadcast."""
        covector = np.asarray(covector)
        return np.tensordot(covector, self.gamma, axes=([-1], [0]))

    def hermiticity(self) -> dict:
        flags = {f"gamma{a + 1}": _hermiticity(g, self.h) for a, g in enumerate(self.gamma)}
        flags["tau"] = _hermiticity(self.tau, self.h)
        return flags

    def adjoint(self, mat):
        return _adjoint(mat, self.h)

    def inner(self, x, y):
        """``<x, y>`` node-wise for arrays of fiber vectors (trailing axis)."""
        return np.einsum("...i,ij,...j->...", np.conj(x), self.h, y)


# ---------------------------------------------------------------- builders

def _with_epsilon(mats, epsilon):
    # generators built with e_a^2 = eta_aa; the other convention is i times them
    return np.array(mats, dtype=complex) * (1 if epsilon == 1 else 1j)


def study_module(epsilon: int = 1) -> CliffordModule:
    """Rank-2 module of the Study numbers over Cl(1,0): ``gamma(dt) = diag(1, -1)``."""
    sig = Signature(1, 0, epsilon, warn=False)
    gamma = _with_epsilon([np.diag([1.0, -1.0])], epsilon)
    return CliffordModule(sig, gamma, _PAULI[0].copy(), np.eye(2, dtype=complex), name="study")


def pauli_module(p: int = 2, q: int = 0, epsilon: int = 1) -> CliffordModule:
    """Rank-2 spinor module for Cl(2,0) or Cl(1,1), graded by sigma_3."""
    if (p, q) == (2, 0):
        mats = [_PAULI[0], _PAULI[1]]
    elif (p, q) == (1, 1):
        mats = [_PAULI[0], 1j * _PAULI[1]]
    else:
        raise SignatureError(f"no Pauli module for ({p}, {q})")
    sig = Signature(p, q, epsilon, warn=False)
    return CliffordModule(sig, _with_epsilon(mats, epsilon), _PAULI[2].copy(),
                          np.eye(2, dtype=complex), name="pauli")


def dirac_module(p: int = 3, q: int = 1, epsilon: int = 1) -> CliffordModule:
    """Rank-4 module for Cl(4,0) or Cl(3,1), graded by the normalized volume element."""
    s1, s2, s3 = _PAULI
    i2 = np.eye(2)
    euclid = [np.kron(s1, s1), np.kron(s1, s2), np.kron(s1, s3), np.kron(s2, i2)]
    if (p, q) == (4, 0):
        mats = euclid
    elif (p, q) == (3, 1):
        mats = euclid[:3] + [1j * euclid[3]]
    else:
        raise SignatureError(f"no 4x4 gamma set for ({p}, {q})")
    sig = Signature(p, q, epsilon, warn=False)
    vol = reduce(np.matmul, mats)
    # scale the volume element so that it squares to the identity
    sq = (vol @ vol)[0, 0]
    tau = vol / np.sqrt(sq)
    return CliffordModule(sig, _with_epsilon(mats, epsilon), tau, np.eye(4, dtype=complex), name="dirac")


def regular_module(signature: Signature) -> CliffordModule:
    """Left-regular representation of Cl(p,q) on itself, graded by parity.

    The hermitian form is the identity on orthonormal blades, under which
    every left multiplication by a generator is a signed permutation.
    """
    gamma = np.array([left_multiplication_matrix(Multivector.blade(signature, 1 << a))
                      for a in range(signature.n)])
    right = np.array([right_multiplication_matrix(Multivector.blade(signature, 1 << a))
                      for a in range(signature.n)])
    parity = np.diag([(-1.0) ** bin(m).count("1") for m in range(signature.dim)]).astype(complex)
    return CliffordModule(signature, gamma, parity, np.eye(signature.dim, dtype=complex),
                          name="regular", right=right, algebra_signature=signature)


BUILTINS = {
    "study": lambda sig: study_module(sig.epsilon),
    "pauli": lambda sig: pauli_module(sig.p, sig.q, sig.epsilon),
    "dirac": lambda sig: dirac_module(sig.p, sig.q, sig.epsilon),
    "regular": regular_module,
}


def builtin_module(name: str, signature: Signature) -> CliffordModule:
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise KeyError(f"unknown built-in module {name!r}; choose from {sorted(BUILTINS)}") from None
    module = factory(signature)
    if module.signature != signature:
        raise SignatureError(f"built-in {name!r} has signature {module.signature}, asked for {signature}")
    return module


# ----------------------------------------------------------- verification

@dataclass
class ModuleReport:
    violations: dict
    hermiticity: dict
    tol: float = TOL

    @property
    def passed(self) -> bool:
        ok = all(v < self.tol for v in self.violations.values())
        return ok and "neither" not in self.hermiticity.values()

    def worst(self):
        key = max(self.violations, key=self.violations.get)
        return key, self.violations[key]


def verify_module(m: CliffordModule, tol: float = TOL) -> ModuleReport:
    """Max violation of each module invariant, keyed by a readable location."""
    eye = m.identity
    eps = m.epsilon
    eta = m.signature.eta
    viol = {}
    for a, b in itertools.product(range(m.n), repeat=2):
        if b < a:
            continue
        anti = m.gamma[a] @ m.gamma[b] + m.gamma[b] @ m.gamma[a]
        target = 2 * eps * eta[a] * eye if a == b else 0 * eye
        viol[f"clifford[{a + 1},{b + 1}]"] = float(np.max(np.abs(anti - target)))
    viol["tau^2"] = float(np.max(np.abs(m.tau @ m.tau - eye)))
    for a in range(m.n):
        viol[f"odd[{a + 1}]"] = float(np.max(np.abs(m.tau @ m.gamma[a] + m.gamma[a] @ m.tau)))
    sv = np.linalg.svd(m.h, compute_uv=False)
    viol["h-degenerate"] = 0.0 if sv[-1] > 1e-10 else 1.0
    viol["h-hermitian"] = float(np.max(np.abs(m.h - m.h.conj().T)))
    return ModuleReport(viol, m.hermiticity(), tol)


def algebra_action(m: CliffordModule, a: Multivector) -> np.ndarray:
    """The algebra homomorphism Cl -> End(E) extending the generator map."""
    if a.signature != m.signature:
        raise SignatureError(f"multivector signature {a.signature} differs from module {m.signature}")
    out = np.zeros((m.rank, m.rank), dtype=complex)
    for mask, coeff in enumerate(a.coefficients):
        if coeff != 0:
            out += coeff * blade_matrix(m, mask)
    return out


def blade_matrix(m: CliffordModule, mask: int) -> np.ndarray:
    mat = m.identity
    for k in range(m.n):
        if mask >> k & 1:
            mat = mat @ m.gamma[k]
    return mat


@dataclass(frozen=True, eq=False)
class EndoForm:
    """End(E)-valued exterior form on orthonormal blades.

    ``coefficients[mask]`` is the endomorphism multiplying ``e^mask``;
    extra leading axes between the blade and matrix axes index grid nodes.
    """

    signature: Signature
    coefficients: np.ndarray

    @classmethod
    def from_components(cls, signature, components: dict, rank=None):
        first = next(iter(components.values()))
        shape = np.shape(first)
        coeffs = np.zeros((signature.dim,) + shape, dtype=complex)
        for key, mat in components.items():
            mask, sign = _mask_of(key)
            coeffs[mask] += sign * np.asarray(mat)
        return cls(signature, coeffs)

    @property
    def degrees(self) -> set:
        nz = np.any(self.coefficients.reshape(self.signature.dim, -1) != 0, axis=1)
        return {bin(m).count("1") for m in range(self.signature.dim) if nz[m]}


def _mask_of(key):
    """Bitmask and permutation sign of an index tuple (1-based)."""
    if isinstance(key, int):
        return key, 1
    idx = [k - 1 for k in key]
    if len(set(idx)) != len(idx):
        raise ValueError(f"repeated index in {key}")
    sign = 1
    for i in range(len(idx)):
        for j in range(i + 1, len(idx)):
            if idx[i] > idx[j]:
                sign = -sign
    return sum(1 << k for k in idx), sign


def quantize(m: CliffordModule, w: EndoForm) -> np.ndarray:
    """``delta_gamma(alpha (x) B) = Gamma(sigma^{-1}(alpha)) B`` summed over blades."""
    if w.signature != m.signature:
        raise SignatureError("form and module signatures differ")
    out = 0
    for mask in range(m.signature.dim):
        coeff = w.coefficients[mask]
        if not np.any(coeff):
            continue
        clif = inverse_symbol_map(ExteriorElement.blade(m.signature, mask))
        out = out + algebra_action(m, clif) @ coeff
    if isinstance(out, int):
        return np.zeros(w.coefficients.shape[1:], dtype=complex)
    return out


def quantized_trace(m: CliffordModule, w: EndoForm):
    return np.trace(quantize(m, w), axis1=-2, axis2=-1)


def canonical_one_form(m: CliffordModule) -> np.ndarray:
    """Components ``Theta(e_a) = (eps/n) gamma(e_a^flat)`` on an orthonormal frame."""
    eta = m.signature.eta
    return m.epsilon / m.n * eta[:, None, None] * m.gamma


def theta_times(m: CliffordModule, phi) -> EndoForm:
    """The End-valued one-form ``Theta Phi`` (components ``Theta(e_a) Phi``)."""
    theta = canonical_one_form(m)
    coeffs = np.zeros((m.signature.dim,) + np.shape(phi), dtype=complex)
    for a in range(m.n):
        # component on e^a pairs with the frame vector e_a
        coeffs[1 << a] = theta[a] @ phi
    return EndoForm(m.signature, coeffs)


def commutant_test(m: CliffordModule, b, tol: float = TOL):
    """Whether ``b`` commutes with every generator, and the worst commutator."""
    b = np.asarray(b)
    worst = 0.0
    for g in m.gamma:
        comm = b @ g - g @ b
        worst = max(worst, float(np.max(np.abs(comm), initial=0.0)))
    return worst < tol, worst


# ------------------------------------------------------------ constructions

@dataclass(frozen=True, eq=False)
class BiModule:
    """Clifford twist ``E' = E (x) Cl``: left action on E, right action on Cl."""

    module: CliffordModule
    left: np.ndarray
    right: np.ndarray
    tau: np.ndarray
    h: np.ndarray
    embedding: np.ndarray

    def as_module(self) -> CliffordModule:
        base = self.module
        return CliffordModule(base.signature, self.left, self.tau, self.h,
                              name=f"{base.name}*Cl", factors=(base, "Cl"))

    def embed(self, z):
        return np.einsum("ij,...j->...i", self.embedding, z)


def clifford_twist(m: CliffordModule) -> BiModule:
    sig = m.signature
    cl = regular_module(sig)
    ident_cl = np.eye(sig.dim, dtype=complex)
    left = np.array([np.kron(g, ident_cl) for g in m.gamma])
    right = np.array([np.kron(m.identity, r) for r in cl.right])
    tau = np.kron(m.tau, ident_cl)
    h = np.kron(m.h, grassmann_gram(sig).astype(complex))
    unit = np.zeros((sig.dim, 1), dtype=complex)
    unit[0, 0] = 1.0
    emb = np.kron(m.identity, unit)
    return BiModule(m, left, right, tau, h, emb)


def twisted_module(m1: CliffordModule, fiber) -> CliffordModule:
    """``E1 (x) E2`` with ``gamma = gamma1 (x) Id``, ``tau = tau1 (x) tau2``, ``h = h1 (x) h2``.

    ``fiber`` is a CliffordModule (its own Clifford action is ignored) or a
    ``(dim, tau2, h2)`` triple.
    """
    if isinstance(fiber, CliffordModule):
        dim, tau2, h2 = fiber.rank, fiber.tau, fiber.h
    else:
        dim, tau2, h2 = fiber
        tau2 = np.eye(dim, dtype=complex) if tau2 is None else np.asarray(tau2, dtype=complex)
        h2 = np.eye(dim, dtype=complex) if h2 is None else np.asarray(h2, dtype=complex)
    ident = np.eye(dim, dtype=complex)
    gamma = np.array([np.kron(g, ident) for g in m1.gamma])
    name = f"{m1.name}(x){getattr(fiber, 'name', dim)}"
    return CliffordModule(m1.signature, gamma, np.kron(m1.tau, tau2), np.kron(m1.h, h2),
                          name=name, factors=(m1, fiber))


def module_from_config(cfg: dict) -> CliffordModule:
    """Build a module from a flat key/value mapping.

    Keys: ``signature = p,q``; ``epsilon``; either ``builtin = name`` or
    ``gamma1 ... gamman``, ``tau`` and optional ``h`` as row-major lists of
    ``re,im`` pairs separated by ``;``.
    """
    p, q = (int(v) for v in str(cfg["signature"]).split(","))
    eps = int(cfg.get("epsilon", 1))
    sig = Signature(p, q, eps, warn=False)
    if "builtin" in cfg:
        return builtin_module(str(cfg["builtin"]).strip(), sig)
    gamma = np.array([_parse_matrix(cfg[f"gamma{a + 1}"]) for a in range(sig.n)])
    tau = _parse_matrix(cfg["tau"])
    h = _parse_matrix(cfg["h"]) if "h" in cfg else np.eye(tau.shape[0], dtype=complex)
    return CliffordModule(sig, gamma, tau, h, name=str(cfg.get("name", "custom")))


def _parse_matrix(text) -> np.ndarray:
    if isinstance(text, (list, tuple, np.ndarray)):
        vals = np.asarray(text, dtype=float).reshape(-1, 2)
    else:
        vals = np.array([[float(x) for x in pair.split(",")] for pair in str(text).split(";") if pair.strip()])
    entries = vals[:, 0] + 1j * vals[:, 1]
    size = int(round(np.sqrt(entries.size)))
    if size * size != entries.size:
        raise ValueError(f"matrix entry count {entries.size} is not a square")
    return entries.reshape(size, size)
