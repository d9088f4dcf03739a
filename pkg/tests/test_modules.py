import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_forge.algebra import ExteriorElement, Multivector, Signature, SignatureError, inverse_symbol_map
from dirac_forge.modules import (CliffordModule, EndoForm, algebra_action, builtin_module, canonical_one_form,
                                 clifford_twist, commutant_test, module_from_config, pauli_module, quantize,
                                 quantized_trace, regular_module, study_module, theta_times, twisted_module,
                                 verify_module)

BUILTIN_CASES = [("study", 1, 0), ("pauli", 2, 0), ("pauli", 1, 1), ("dirac", 4, 0), ("dirac", 3, 1)]
ALL_SIGS = [(p, n - p) for n in range(1, 5) for p in range(n + 1)]


def sig(p, q, eps=1):
    return Signature(p, q, eps, warn=False)


@pytest.mark.parametrize("name,p,q", BUILTIN_CASES)
@pytest.mark.parametrize("eps", [1, -1])
def test_builtin_modules_verify(name, p, q, eps):
    m = builtin_module(name, sig(p, q, eps))
    report = verify_module(m)
    assert report.passed, report.worst()
    assert "neither" not in m.hermiticity().values()


@pytest.mark.parametrize("p,q", ALL_SIGS)
@pytest.mark.parametrize("eps", [1, -1])
def test_regular_module_verifies(p, q, eps):
    assert verify_module(regular_module(sig(p, q, eps))).passed


def test_study_module_generator():
    m = study_module()
    assert np.array_equal(m.gamma[0], np.diag([1.0, -1.0]))


def test_wrong_sign_is_located():
    m = pauli_module()
    bad = CliffordModule(m.signature, np.array([m.gamma[0], 1j * m.gamma[1]]), m.tau, m.h)
    report = verify_module(bad)
    assert not report.passed
    assert report.worst()[0] == "clifford[2,2]"


def test_unknown_builtin_and_mismatch():
    with pytest.raises(KeyError):
        builtin_module("nope", sig(2, 0))
    with pytest.raises(SignatureError):
        builtin_module("pauli", sig(3, 0))


# ---------------------------------------------------------- algebra action

def test_algebra_action_examples():
    for eps in (1, -1):
        m = pauli_module(epsilon=eps)
        s = m.signature
        assert np.allclose(algebra_action(m, Multivector.scalar(s)), np.eye(2))
        e1, e2 = Multivector.blade(s, 1), Multivector.blade(s, 2)
        assert np.allclose(algebra_action(m, e1 * e2), m.gamma[0] @ m.gamma[1])
        assert np.allclose(algebra_action(m, e1 * e1), eps * np.eye(2))


@given(st.sampled_from(ALL_SIGS), st.sampled_from([1, -1]), st.integers(0, 2**32 - 1))
@settings(max_examples=25)
def test_algebra_action_is_multiplicative(pq, eps, seed):
    s = sig(*pq, eps)
    m = regular_module(s)
    rng = np.random.default_rng(seed)
    a = Multivector(rng.normal(size=s.dim) + 1j * rng.normal(size=s.dim), s)
    b = Multivector(rng.normal(size=s.dim) + 1j * rng.normal(size=s.dim), s)
    lhs = algebra_action(m, a * b)
    assert np.abs(lhs - algebra_action(m, a) @ algebra_action(m, b)).max() < 1e-11


# -------------------------------------------------------------- quantize

def test_quantize_examples():
    m = pauli_module()
    s = m.signature
    B = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.allclose(quantize(m, EndoForm.from_components(s, {0: B})), B)
    assert np.allclose(quantize(m, EndoForm.from_components(s, {(1,): np.eye(2)})), m.gamma[0])
    two = EndoForm.from_components(s, {(1, 2): B})
    assert np.allclose(quantize(m, two), m.gamma[0] @ m.gamma[1] @ B)
    assert np.isclose(quantized_trace(m, two), np.trace(m.gamma[0] @ m.gamma[1] @ B))
    assert quantized_trace(m, EndoForm.from_components(s, {0: np.eye(2)})) == 2
    assert quantized_trace(m, EndoForm.from_components(s, {(1,): np.eye(2)})) == 0


def test_endo_form_antisymmetry():
    s = sig(2, 0)
    B = np.eye(2)
    w = EndoForm.from_components(s, {(2, 1): B})
    assert np.array_equal(w.coefficients[3], -B)
    assert w.degrees == {2}
    with pytest.raises(ValueError):
        EndoForm.from_components(s, {(1, 1): B})


@pytest.mark.parametrize("p,q", ALL_SIGS)
@pytest.mark.parametrize("eps", [1, -1])
def test_quantize_of_scalar_forms_matches_algebra_action(p, q, eps):
    s = sig(p, q, eps)
    m = regular_module(s)
    rng = np.random.default_rng(p * 10 + q)
    coeffs = rng.normal(size=s.dim)
    w = EndoForm(s, coeffs[:, None, None] * np.eye(m.rank))
    expect = algebra_action(m, inverse_symbol_map(ExteriorElement(coeffs, s)))
    assert np.abs(quantize(m, w) - expect).max() < 1e-12


@pytest.mark.parametrize("p,q", ALL_SIGS)
@pytest.mark.parametrize("eps", [1, -1])
def test_quantize_is_left_inverse_of_theta(p, q, eps):
    m = regular_module(sig(p, q, eps))
    rng = np.random.default_rng(7)
    assert np.allclose(quantize(m, theta_times(m, m.identity)), m.identity, atol=1e-12)
    for _ in range(100 if m.rank <= 4 else 10):
        phi = rng.normal(size=(m.rank, m.rank)) + 1j * rng.normal(size=(m.rank, m.rank))
        assert np.abs(quantize(m, theta_times(m, phi)) - phi).max() < 1e-12


def test_canonical_one_form_components():
    for eps in (1, -1):
        m = pauli_module(1, 1, eps)
        theta = canonical_one_form(m)
        for a in range(2):
            assert np.allclose(theta[a], eps / 2 * m.signature.eta[a] * m.gamma[a])


# ------------------------------------------------------------- commutant

def test_commutant_examples():
    m = pauli_module()
    assert commutant_test(m, np.eye(2))[0]
    ok, worst = commutant_test(m, m.gamma[0])
    assert not ok and worst > 1
    ok, worst = commutant_test(m, m.tau @ m.gamma[0] @ m.gamma[1])
    assert ok == (worst < 1e-12)


# ----------------------------------------------------------------- twists

@pytest.mark.parametrize("name,p,q", BUILTIN_CASES)
@pytest.mark.parametrize("eps", [1, -1])
def test_clifford_twist_is_a_bimodule(name, p, q, eps):
    m = builtin_module(name, sig(p, q, eps))
    tw = clifford_twist(m)
    for L, R in itertools.product(tw.left, tw.right):
        assert np.abs(L @ R - R @ L).max() < 1e-12
    assert verify_module(tw.as_module()).passed
    rng = np.random.default_rng(1)
    z1, z2 = (rng.normal(size=m.rank) + 1j * rng.normal(size=m.rank) for _ in range(2))
    for a in range(m.n):
        assert np.allclose(tw.left[a] @ tw.embed(z1), tw.embed(m.gamma[a] @ z1))
    inner = np.conj(tw.embed(z1)) @ tw.h @ tw.embed(z2)
    assert np.isclose(inner, m.inner(z1, z2))


def test_twisted_module_examples():
    m = pauli_module()
    trivial = twisted_module(m, (1, None, None))
    assert np.allclose(trivial.gamma, m.gamma) and np.allclose(trivial.tau, m.tau)
    graded = twisted_module(study_module(), (2, np.diag([1.0, -1.0]), None))
    assert graded.rank == 4
    assert verify_module(graded).passed


@given(st.sampled_from(BUILTIN_CASES), st.sampled_from([1, -1]), st.integers(1, 3))
@settings(max_examples=20)
def test_twisted_module_always_verifies(case, eps, dim):
    name, p, q = case
    m = builtin_module(name, sig(p, q, eps))
    tau2 = np.diag([(-1.0) ** k for k in range(dim)])
    assert verify_module(twisted_module(m, (dim, tau2, None))).passed


def test_module_from_config():
    cfg = {"signature": "2,0", "epsilon": 1, "gamma1": "0,0; 1,0; 1,0; 0,0",
           "gamma2": "0,0; 0,-1; 0,1; 0,0", "tau": "1,0; 0,0; 0,0; -1,0"}
    m = module_from_config(cfg)
    assert verify_module(m).passed
    assert np.allclose(m.gamma, pauli_module().gamma)
    assert module_from_config({"signature": "1,1", "builtin": "pauli"}).rank == 2
