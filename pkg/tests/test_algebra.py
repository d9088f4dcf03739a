import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_forge.algebra import (ExteriorElement, Multivector, Signature, SignatureError, canonical_action_matrix,
                                 canonical_clifford_action, clifford_product, flat, grassmann_inner_product,
                                 inverse_symbol_map, musical, sharp, symbol_map, wedge_product)


def sig(p, q, eps=1):
    return Signature(p, q, eps, warn=False)


def e(s, *idx):
    """Blade ``e_{i1} ... e_{ik}`` (1-based indices, increasing)."""
    return Multivector.blade(s, sum(1 << (i - 1) for i in idx))


def ext(s, *idx):
    return ExteriorElement.blade(s, sum(1 << (i - 1) for i in idx))


signatures = st.sampled_from([(p, n - p) for n in range(1, 5) for p in range(n + 1)])
epsilons = st.sampled_from([1, -1])
seeds = st.integers(0, 2**32 - 1)


def random_mv(s, rng):
    return Multivector(rng.normal(size=s.dim) + 1j * rng.normal(size=s.dim), s)


# ---------------------------------------------------------------- signature

def test_signature_validation():
    with pytest.raises(SignatureError):
        Signature(0, 0)
    with pytest.raises(SignatureError):
        Signature(7, 0)
    with pytest.raises(SignatureError):
        Signature(2, 0, epsilon=0)
    assert Signature(7, 0, cap=8, warn=False).n == 7


def test_signature_warns_on_one_mod_four():
    with pytest.warns(UserWarning):
        Signature(1, 0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        Signature(2, 0)
        Signature(1, 0, warn=False)


# ---------------------------------------------------------------- products

def test_generator_square_positive():
    s = sig(1, 0)
    assert (e(s, 1) * e(s, 1)).allclose(Multivector.scalar(s, 1.0))


def test_bivector_square_is_minus_one():
    s = sig(2, 0)
    b = e(s, 1, 2)
    assert (b * b).allclose(Multivector.scalar(s, -1.0))


def test_unit_is_neutral():
    s = sig(2, 1)
    rng = np.random.default_rng(0)
    b = random_mv(s, rng)
    assert (Multivector.scalar(s) * b).allclose(b)
    assert (b * Multivector.scalar(s)).allclose(b)


def test_signature_mismatch_rejected():
    with pytest.raises(SignatureError):
        clifford_product(e(sig(2, 0), 1), e(sig(1, 1), 1))


@given(signatures, epsilons)
def test_generator_relations(pq, eps):
    s = sig(*pq, eps)
    for k, l in itertools.product(range(1, s.n + 1), repeat=2):
        anti = e(s, k) * e(s, l) + e(s, l) * e(s, k)
        expect = 2 * eps * s.eta[k - 1] if k == l else 0.0
        assert np.array_equal(anti.coefficients, Multivector.scalar(s, expect).coefficients)


@given(signatures, epsilons, seeds)
@settings(max_examples=30)
def test_associativity(pq, eps, seed):
    s = sig(*pq, eps)
    rng = np.random.default_rng(seed)
    a, b, c = (random_mv(s, rng) for _ in range(3))
    assert np.abs(((a * b) * c - a * (b * c)).coefficients).max() < 1e-12


def test_wedge_is_metric_free():
    for eps in (1, -1):
        s = sig(1, 1, eps)
        assert (ext(s, 1) ^ ext(s, 1)).allclose(ExteriorElement.zero(s))
        assert (ext(s, 2) ^ ext(s, 1)).allclose(-1 * ext(s, 1, 2))
    assert wedge_product(ext(sig(2, 0), 1), ext(sig(2, 0), 2)).allclose(ext(sig(2, 0), 1, 2))


# -------------------------------------------------------------- symbol map

def test_symbol_map_examples():
    s = sig(2, 0)
    assert symbol_map(Multivector.scalar(s)).allclose(ExteriorElement.scalar(s))
    assert symbol_map(e(s, 1) * e(s, 2)).allclose(ext(s, 1, 2))
    s1 = sig(1, 0)
    assert symbol_map(e(s1, 1) * e(s1, 1)).allclose(ExteriorElement.scalar(s1))


def test_inverse_symbol_map_examples():
    s = sig(2, 0)
    assert inverse_symbol_map(ExteriorElement.scalar(s)).allclose(Multivector.scalar(s))
    assert inverse_symbol_map(ext(s, 1, 2)).allclose(e(s, 1) * e(s, 2))


@given(signatures, epsilons, seeds)
@settings(max_examples=25)
def test_symbol_map_round_trip(pq, eps, seed):
    s = sig(*pq, eps)
    rng = np.random.default_rng(seed)
    for _ in range(4):
        a = random_mv(s, rng)
        assert np.abs((inverse_symbol_map(symbol_map(a)) - a).coefficients).max() < 1e-12
        w = ExteriorElement(a.coefficients, s)
        assert np.abs((symbol_map(inverse_symbol_map(w)) - w).coefficients).max() < 1e-12


@given(signatures, epsilons, seeds)
@settings(max_examples=25)
def test_symbol_of_vector_product(pq, eps, seed):
    # sigma(u v) = u ^ v + eps g(u, v)
    s = sig(*pq, eps)
    rng = np.random.default_rng(seed)
    u, v = rng.normal(size=s.n), rng.normal(size=s.n)
    lhs = symbol_map(Multivector.vector(s, u) * Multivector.vector(s, v))
    rhs = (ExteriorElement.vector(s, u) ^ ExteriorElement.vector(s, v)) + ExteriorElement.scalar(
        s, eps * float(np.sum(s.eta * u * v)))
    assert lhs.allclose(rhs)


# ------------------------------------------------------- canonical action

def test_canonical_action_examples():
    s = sig(1, 0)
    assert canonical_clifford_action([1.0], ExteriorElement.scalar(s)).allclose(ext(s, 1))
    assert canonical_clifford_action([1.0], ext(s, 1)).allclose(ExteriorElement.scalar(s))


@given(signatures, epsilons, seeds)
@settings(max_examples=30)
def test_canonical_action_squares(pq, eps, seed):
    s = sig(*pq, eps)
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=s.n), rng.normal(size=s.n)
    A, B = canonical_action_matrix(s, a), canonical_action_matrix(s, b)
    g_ab = float(np.sum(s.eta * a * b))
    assert np.abs(A @ B + B @ A - 2 * eps * g_ab * np.eye(s.dim)).max() < 1e-12
    w = ExteriorElement(rng.normal(size=s.dim), s)
    twice = canonical_clifford_action(a, canonical_clifford_action(a, w))
    assert twice.allclose(eps * float(np.sum(s.eta * a * a)) * w, atol=1e-12)


# ------------------------------------------------------- inner product

def test_grassmann_inner_product_examples():
    assert grassmann_inner_product(ext(sig(1, 0), 1), ext(sig(1, 0), 1)) == 1
    assert grassmann_inner_product(ext(sig(0, 1), 1), ext(sig(0, 1), 1)) == -1
    s = sig(2, 0)
    assert grassmann_inner_product(ext(s, 1, 2), ext(s, 1)) == 0


@given(signatures, seeds)
@settings(max_examples=20)
def test_inner_product_on_vectors_is_the_metric(pq, seed):
    s = sig(*pq)
    rng = np.random.default_rng(seed)
    u, v = rng.normal(size=s.n), rng.normal(size=s.n)
    val = grassmann_inner_product(ExteriorElement.vector(s, u), ExteriorElement.vector(s, v))
    assert math.isclose(val.real, float(np.sum(s.eta * u * v)), abs_tol=1e-12)


def test_grades_are_orthogonal():
    s = sig(2, 1)
    rng = np.random.default_rng(3)
    w = ExteriorElement(rng.normal(size=s.dim), s)
    for j, k in itertools.combinations(range(s.n + 1), 2):
        assert abs(grassmann_inner_product(w.grade_part(j), w.grade_part(k))) < 1e-14


# ------------------------------------------------------------- musical

def test_musical_examples():
    v = np.array([0.3, -1.2])
    assert np.array_equal(flat(v, np.eye(2)), v)
    theta = 0.7
    g = np.diag([1.0, math.sin(theta) ** 2])
    assert np.allclose(flat([0.0, 1.0], g), [0.0, math.sin(theta) ** 2])


@given(seeds)
@settings(max_examples=20)
def test_musical_round_trip(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(3, 3))
    g = a @ a.T + 3 * np.eye(3)
    v = rng.normal(size=3)
    assert np.abs(sharp(flat(v, g), g) - v).max() < 1e-12
    assert np.abs(musical(musical(v, g, "flat"), g, "sharp") - v).max() < 1e-12
    u = rng.normal(size=3)
    assert math.isclose(u @ g @ v, flat(u, g) @ np.linalg.inv(g) @ flat(v, g), rel_tol=1e-12)


def test_singular_metric_rejected():
    with pytest.raises(ValueError):
        flat([1.0, 0.0], np.zeros((2, 2)))
