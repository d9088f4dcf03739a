"""Complexified Clifford and Grassmann algebras over an orthonormal basis.

Blades are indexed by bitmask: bit ``k`` set means generator ``e_{k+1}``
is present, factors always written in increasing index order.  The
Clifford relation is ``e_k e_k = epsilon * eta_kk`` with
``eta = diag(+1 x p, -1 x q)``; ``epsilon`` is carried by the signature
and threaded through every formula that depends on it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

DEFAULT_DIMENSION_CAP = 6


class SignatureError(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    """Metric signature ``(p, q)`` together with the product sign convention."""

    p: int
    q: int
    epsilon: int = 1
    cap: int = field(default=DEFAULT_DIMENSION_CAP, compare=False)
    warn: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise SignatureError(f"negative signature entry ({self.p}, {self.q})")
        if not 1 <= self.p + self.q <= self.cap:
            raise SignatureError(f"dimension {self.p + self.q} outside [1, {self.cap}]")
        if self.epsilon not in (1, -1):
            raise SignatureError(f"epsilon must be +1 or -1, got {self.epsilon}")
        if self.warn and (self.p - self.q) % 4 == 1:
            warnings.warn(f"signature p - q = {self.p - self.q} is 1 mod 4", stacklevel=3)

    @property
    def n(self) -> int:
        return self.p + self.q

    @property
    def dim(self) -> int:
        return 1 << self.n

    @property
    def eta(self) -> np.ndarray:
        return np.array([1.0] * self.p + [-1.0] * self.q)

    def with_epsilon(self, epsilon: int) -> "Signature":
        return Signature(self.p, self.q, epsilon, self.cap, warn=False)


def grade(mask: int) -> int:
    return bin(mask).count("1")


def _reorder_sign(a: int, b: int) -> int:
    """Sign of moving the generators of ``b`` past those of ``a`` into order."""
    swaps = 0
    a >>= 1
    while a:
        swaps += grade(a & b)
        a >>= 1
    return -1 if swaps & 1 else 1


@lru_cache(maxsize=None)
def _tables(p: int, q: int, epsilon: int):
    n = p + q
    dim = 1 << n
    sq = [epsilon * (1 if k < p else -1) for k in range(n)]
    index = np.empty((dim, dim), dtype=np.intp)
    clif = np.empty((dim, dim))
    wedge = np.empty((dim, dim))
    for a in range(dim):
        for b in range(dim):
            s = _reorder_sign(a, b)
            common = a & b
            metric = 1
            for k in range(n):
                if common >> k & 1:
                    metric *= sq[k]
            index[a, b] = a ^ b
            clif[a, b] = s * metric
            wedge[a, b] = 0.0 if common else s
    for arr in (index, clif, wedge):
        arr.setflags(write=False)
    return index, clif, wedge


def _check_same(a, b):
    if a.signature != b.signature:
        raise SignatureError(f"signature mismatch: {a.signature} vs {b.signature}")


def _bilinear(x, y, index, weight):
    out = np.zeros(x.shape[0], dtype=complex)
    np.add.at(out, index.ravel(), (weight * np.outer(x, y)).ravel())
    return out


class _BladeElement:
    __slots__ = ("coefficients", "signature")

    def __init__(self, coefficients, signature: Signature):
        coeffs = np.asarray(coefficients, dtype=complex)
        if coeffs.shape != (signature.dim,):
            raise ValueError(f"expected {signature.dim} coefficients, got shape {coeffs.shape}")
        coeffs = coeffs.copy()
        coeffs.setflags(write=False)
        self.coefficients = coeffs
        self.signature = signature

    @classmethod
    def zero(cls, signature):
        return cls(np.zeros(signature.dim), signature)

    @classmethod
    def scalar(cls, signature, value=1.0):
        c = np.zeros(signature.dim, dtype=complex)
        c[0] = value
        return cls(c, signature)

    @classmethod
    def blade(cls, signature, mask: int, value=1.0):
        c = np.zeros(signature.dim, dtype=complex)
        c[mask] = value
        return cls(c, signature)

    @classmethod
    def vector(cls, signature, components):
        c = np.zeros(signature.dim, dtype=complex)
        for k, v in enumerate(components):
            c[1 << k] = v
        return cls(c, signature)

    def grade_part(self, k: int):
        c = np.array([v if grade(m) == k else 0.0 for m, v in enumerate(self.coefficients)])
        return type(self)(c, self.signature)

    def __add__(self, other):
        _check_same(self, other)
        return type(self)(self.coefficients + other.coefficients, self.signature)

    def __sub__(self, other):
        _check_same(self, other)
        return type(self)(self.coefficients - other.coefficients, self.signature)

    def __neg__(self):
        return type(self)(-self.coefficients, self.signature)

    def __rmul__(self, scalar):
        return type(self)(scalar * self.coefficients, self.signature)

    def allclose(self, other, atol=1e-12) -> bool:
        _check_same(self, other)
        return bool(np.max(np.abs(self.coefficients - other.coefficients), initial=0.0) <= atol)

    def __repr__(self):
        terms = [f"{v:.4g}*e{m:0{self.signature.n}b}" for m, v in enumerate(self.coefficients) if v != 0]
        return f"{type(self).__name__}({' + '.join(terms) or '0'})"


class Multivector(_BladeElement):
    """Element of the complexified Clifford algebra; ``*`` is the Clifford product."""

    __slots__ = ()

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return clifford_product(self, other)
        return Multivector(self.coefficients * other, self.signature)


class ExteriorElement(_BladeElement):
    """Element of the complexified Grassmann algebra; ``^`` is the wedge product."""

    __slots__ = ()

    def __mul__(self, scalar):
        return ExteriorElement(self.coefficients * scalar, self.signature)

    def __xor__(self, other):
        return wedge_product(self, other)


def clifford_product(a: Multivector, b: Multivector) -> Multivector:
    _check_same(a, b)
    s = a.signature
    index, clif, _ = _tables(s.p, s.q, s.epsilon)
    return Multivector(_bilinear(a.coefficients, b.coefficients, index, clif), s)


def wedge_product(a: ExteriorElement, b: ExteriorElement) -> ExteriorElement:
    _check_same(a, b)
    s = a.signature
    index, _, wedge = _tables(s.p, s.q, s.epsilon)
    return ExteriorElement(_bilinear(a.coefficients, b.coefficients, index, wedge), s)


def left_multiplication_matrix(a: Multivector) -> np.ndarray:
    """Matrix of ``x -> a x`` on the blade basis."""
    s = a.signature
    index, clif, _ = _tables(s.p, s.q, s.epsilon)
    mat = np.zeros((s.dim, s.dim), dtype=complex)
    for m, coeff in enumerate(a.coefficients):
        if coeff != 0:
            # column b receives a_m * sign(m, b) at row m ^ b
            mat[index[m], np.arange(s.dim)] += coeff * clif[m]
    return mat


def right_multiplication_matrix(a: Multivector) -> np.ndarray:
    """Matrix of ``x -> x a`` on the blade basis."""
    s = a.signature
    index, clif, _ = _tables(s.p, s.q, s.epsilon)
    mat = np.zeros((s.dim, s.dim), dtype=complex)
    for m, coeff in enumerate(a.coefficients):
        if coeff != 0:
            mat[index[:, m], np.arange(s.dim)] += coeff * clif[:, m]
    return mat


def interior_product(vector, w: ExteriorElement) -> ExteriorElement:
    """Contraction ``int(v) w`` of a vector (orthonormal components) into ``w``."""
    s = w.signature
    out = np.zeros(s.dim, dtype=complex)
    for m, coeff in enumerate(w.coefficients):
        if coeff == 0:
            continue
        sign = 1
        for k in range(s.n):
            if m >> k & 1:
                out[m ^ (1 << k)] += sign * vector[k] * coeff
                sign = -sign
    return ExteriorElement(out, s)


def canonical_clifford_action(alpha, w: ExteriorElement) -> ExteriorElement:
    """``gamma_Cl(alpha) w = epsilon int(alpha^sharp) w + alpha ^ w`` for a covector ``alpha``.

    ``alpha`` is given by orthonormal-coframe components; raising its index
    multiplies component ``k`` by ``eta_kk``.
    """
    s = w.signature
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.shape != (s.n,):
        raise ValueError(f"covector must have {s.n} components")
    sharp = s.eta * alpha
    ext = wedge_product(ExteriorElement.vector(s, alpha), w)
    return s.epsilon * interior_product(sharp, w) + ext


def canonical_action_matrix(signature: Signature, alpha) -> np.ndarray:
    cols = [canonical_clifford_action(alpha, ExteriorElement.blade(signature, m)).coefficients
            for m in range(signature.dim)]
    return np.array(cols).T


@lru_cache(maxsize=None)
def _symbol_matrix(p: int, q: int, epsilon: int) -> np.ndarray:
    s = Signature(p, q, epsilon, warn=False)
    gens = [canonical_action_matrix(s, np.eye(s.n)[k]) for k in range(s.n)]
    unit = np.zeros(s.dim, dtype=complex)
    unit[0] = 1.0
    cols = []
    for m in range(s.dim):
        v = unit
        # blade e_{k1} e_{k2} ... acts rightmost factor first
        for k in reversed([k for k in range(s.n) if m >> k & 1]):
            v = gens[k] @ v
        cols.append(v)
    mat = np.array(cols).T
    mat.setflags(write=False)
    return mat


def symbol_map(a: Multivector) -> ExteriorElement:
    """``sigma(a) = Gamma_Cl(a) 1``, the linear isomorphism Cl -> Lambda."""
    s = a.signature
    return ExteriorElement(_symbol_matrix(s.p, s.q, s.epsilon) @ a.coefficients, s)


def inverse_symbol_map(w: ExteriorElement) -> Multivector:
    s = w.signature
    return Multivector(np.linalg.solve(_symbol_matrix(s.p, s.q, s.epsilon), w.coefficients), s)


def grassmann_gram(signature: Signature) -> np.ndarray:
    """Diagonal Gram matrix of the extended metric on orthonormal blades."""
    eta = signature.eta
    diag = [np.prod([eta[k] for k in range(signature.n) if m >> k & 1]) for m in range(signature.dim)]
    return np.diag(np.array(diag, dtype=float))


def grassmann_inner_product(a: ExteriorElement, b: ExteriorElement) -> complex:
    """Hermitian extension of the cotangent metric; grades are orthogonal."""
    _check_same(a, b)
    gram = np.diag(grassmann_gram(a.signature))
    return complex(np.sum(np.conj(a.coefficients) * gram * b.coefficients))


def flat(vector, metric) -> np.ndarray:
    """Lower an index with the metric ``g_ij``."""
    metric = np.asarray(metric)
    _check_nondegenerate(metric)
    return metric @ np.asarray(vector)


def sharp(covector, metric) -> np.ndarray:
    """Raise an index with the inverse metric."""
    metric = np.asarray(metric)
    _check_nondegenerate(metric)
    return np.linalg.solve(metric, np.asarray(covector))


def musical(v, metric, to: str = "flat") -> np.ndarray:
    if to == "flat":
        return flat(v, metric)
    if to == "sharp":
        return sharp(v, metric)
    raise ValueError(f"unknown direction {to!r}")


def _check_nondegenerate(metric, tol=1e-14):
    if abs(np.linalg.det(metric)) <= tol:
        raise np.linalg.LinAlgError("metric is singular at this node")
