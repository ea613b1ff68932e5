import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cqm.algebra import (check_cstar_identity, cluster_eigenvalues, commutator, cstar_norm,
                         hermitian_square_root, make_observable, matrix_from_json,
                         matrix_to_json, pauli, spectral_decomposition, spectrum, tau)
from cqm.errors import DimMismatch, NonFinite, NotHermitian
from cqm.experiments import spin1_matrices

from conftest import dims, random_hermitian, random_unitary, seeds


def test_pauli_algebra():
    t1, t2, t3 = pauli()
    for t in (t1, t2, t3):
        assert np.allclose(t @ t, np.eye(2), atol=0)
    assert np.allclose(commutator(t1, t2), 2j * t3, atol=0)
    assert np.allclose(t1 @ t2, 1j * t3, atol=0)


def test_spin1_commutation():
    sx, sy, sz = spin1_matrices()
    assert np.allclose(commutator(sx, sy), 1j * sz, atol=1e-15)
    assert np.allclose(commutator(sy, sz), 1j * sx, atol=1e-15)
    casimir = sx @ sx + sy @ sy + sz @ sz
    assert np.allclose(casimir, 2 * np.eye(3), atol=1e-15)


def test_make_observable_symmetrises_within_tolerance():
    m = np.array([[1.0, 1 + 1e-12], [1.0, 2.0]])
    obs = make_observable(m)
    assert np.array_equal(obs.matrix, obs.matrix.conj().T)
    with pytest.raises(NotHermitian):
        make_observable([[0, 1], [0, 0]])
    with pytest.raises(NonFinite):
        make_observable([[np.nan, 0], [0, 1]])
    with pytest.raises(DimMismatch):
        make_observable(np.ones((2, 3)))


def test_observable_is_immutable():
    obs = make_observable(np.eye(2))
    with pytest.raises(ValueError):
        obs.matrix[0, 0] = 3


def test_spectral_decomposition_degenerate_block():
    d = spectral_decomposition(np.diag([1.0, 1.0, -2.0]))
    assert d.eigenvalues == pytest.approx([-2.0, 1.0])
    assert list(d.multiplicities) == [1, 2]
    assert np.allclose(d.projectors[1], np.diag([1, 1, 0]))


def test_cluster_eigenvalues_chains_gaps():
    groups = cluster_eigenvalues(np.array([0.0, 0.5e-9, 1.0e-9, 1.0]), 1e-9)
    assert [len(g) for g in groups] == [3, 1]


def test_pauli_spectrum_and_norm():
    assert spectrum(tau([0.0, 0.6, 0.8])) == pytest.approx((-1.0, 1.0))
    assert cstar_norm(np.array([[0, 2], [0, 0]])) == pytest.approx(2.0)


@given(seeds, dims)
def test_spectral_reconstruction(seed, n):
    gen = np.random.default_rng(seed)
    a = random_hermitian(gen, n)
    d = spectral_decomposition(a)
    assert np.allclose(d.reconstruct(), a, atol=1e-10)
    total = sum(d.projectors)
    assert np.allclose(total, np.eye(n), atol=1e-10)
    for p in d.projectors:
        assert np.allclose(p @ p, p, atol=1e-10)


@given(seeds, dims)
def test_spectral_function_matches_matrix_square(seed, n):
    a = random_hermitian(np.random.default_rng(seed), n)
    assert np.allclose(spectral_decomposition(a).function(lambda x: x * x), a @ a, atol=1e-9)


@given(seeds, st.integers(min_value=1, max_value=16))
def test_cstar_identity(seed, n):
    gen = np.random.default_rng(seed)
    r = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
    assert check_cstar_identity(r)
    lam = np.linalg.eigvalsh(r.conj().T @ r)[-1]
    assert abs(cstar_norm(r) ** 2 - lam) <= 1e-10 * max(1.0, lam)


@given(seeds, dims)
def test_norm_is_unitarily_invariant(seed, n):
    gen = np.random.default_rng(seed)
    r = gen.standard_normal((n, n))
    u = random_unitary(gen, n)
    assert cstar_norm(u @ r @ u.conj().T) == pytest.approx(cstar_norm(r), rel=1e-10)


def test_zero_norm_only_for_zero():
    assert cstar_norm(np.zeros((3, 3))) == 0.0
    assert cstar_norm(np.diag([0, 0, 1e-300])) > 0.0


@given(seeds, dims)
def test_square_root_of_positive(seed, n):
    gen = np.random.default_rng(seed)
    x = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
    s = hermitian_square_root(x).matrix
    assert np.allclose(s @ s, x.conj().T @ x, atol=1e-8)
    assert np.linalg.eigvalsh(s)[0] >= -1e-10


def test_matrix_json_round_trip(gen):
    m = random_hermitian(gen, 4)
    assert np.array_equal(matrix_from_json(matrix_to_json(m)), m)
