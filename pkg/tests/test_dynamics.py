import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from cqm.algebra import cstar_norm, make_observable, pauli, spectrum
from cqm.contexts import joint_context
from cqm.dynamics import (Hamiltonian, ergodicity_check, evolve, evolve_state_eval,
                          ground_functional, ground_projector, hamiltonian_context, time_average)
from cqm.errors import DegenerateGround, DimMismatch, NotGroundState, NotInContext
from cqm.oscillator import build_truncation
from cqm.states import PhysicalState, evaluate

from conftest import dims, random_hermitian, random_unitary, seeds

T1, T2, T3 = pauli()


def random_nondegenerate_h(gen, n, gap=0.2):
    e = np.cumsum(gap + gen.random(n))
    u = random_unitary(gen, n)
    return u @ np.diag(e) @ u.conj().T, e


def test_evolution_at_zero():
    a = random_hermitian(np.random.default_rng(0), 3)
    h = random_hermitian(np.random.default_rng(1), 3)
    assert np.allclose(evolve(a, h, 0.0), a, atol=1e-13)


@given(st.floats(-3, 3), st.floats(-20, 20), seeds)
def test_two_level_rotation_against_expm(e0, t, seed):
    gen = np.random.default_rng(seed)
    a = random_hermitian(gen, 2)
    got = evolve(a, e0 * T3, t)
    oracle = expm(-1j * e0 * t * T3) @ a @ expm(1j * e0 * t * T3)
    assert np.allclose(got, oracle, atol=1e-10)
    assert got[0, 0] == pytest.approx(a[0, 0], abs=1e-12)
    assert got[0, 1] == pytest.approx(a[0, 1] * np.exp(-2j * e0 * t), abs=1e-10)


@given(seeds, dims, st.floats(-5, 5))
def test_evolution_preserves_spectrum(seed, n, t):
    gen = np.random.default_rng(seed)
    a = make_observable(random_hermitian(gen, n))
    out = evolve(a, random_hermitian(gen, n), t)
    assert np.allclose(spectrum(out), spectrum(a), atol=1e-9)


@given(seeds, dims, st.floats(-5, 5), st.floats(-5, 5))
def test_group_property(seed, n, s, t):
    gen = np.random.default_rng(seed)
    a, h = random_hermitian(gen, n), Hamiltonian.from_matrix(random_hermitian(gen, n))
    assert np.allclose(evolve(a, h, s + t), evolve(evolve(a, h, s), h, t), atol=1e-9)


def test_conserved_value():
    ctx = joint_context([T3])
    phi = PhysicalState({ctx.id: 1}, 2)
    for t in np.linspace(-4, 4, 9):
        assert evolve_state_eval(phi, T3, ctx, 0.7 * T3, t) == pytest.approx(-1.0, abs=1e-12)


def test_evolution_leaves_the_context():
    e0 = 0.9
    ctx1, ctx2 = joint_context([T1]), joint_context([T2])
    # quarter turn: tau_1 -> tau_2, which lives only in the tau_2 context
    quarter = np.pi / (4 * e0)
    assert np.allclose(evolve(T1, e0 * T3, quarter), T2, atol=1e-12)
    with pytest.raises(NotInContext):
        evolve_state_eval(PhysicalState({ctx1.id: 0}, 2), T1, ctx1, e0 * T3, quarter)
    phi = PhysicalState({ctx2.id: 0}, 2)
    assert evolve_state_eval(phi, T1, ctx2, e0 * T3, quarter) == pytest.approx(
        evaluate(phi, T2, ctx2), abs=1e-12)
    # half turn: tau_1 -> -tau_1, back in its own context with the sign flipped
    half = np.pi / (2 * e0)
    assert np.allclose(evolve(T1, e0 * T3, half), -T1, atol=1e-12)
    phi1 = PhysicalState({ctx1.id: 0}, 2)
    assert evolve_state_eval(phi1, T1, ctx1, e0 * T3, half) == pytest.approx(
        -evaluate(phi1, T1, ctx1), abs=1e-12)


def test_dimension_mismatch():
    with pytest.raises(DimMismatch):
        evolve(np.eye(3), T3, 1.0)
    with pytest.raises(DimMismatch):
        time_average(np.eye(3), T3)


@given(seeds)
def test_two_level_time_average(seed):
    a = random_hermitian(np.random.default_rng(seed), 2)
    e0 = 1.3
    assert np.allclose(time_average(a, e0 * T3), np.diag(np.diag(a)), atol=1e-14)


def test_commuting_observable_is_its_own_average():
    a = np.diag([1.0, -2.0, 0.5])
    assert np.allclose(time_average(a, np.diag([0.0, 1.0, 3.0])), a, atol=1e-15)


def test_time_average_matches_trapezoid_quadrature():
    gen = np.random.default_rng(42)
    n = 6
    h, _ = random_nondegenerate_h(gen, n)
    a = random_hermitian(gen, n)
    # oracle: (1/2L) int_{-L}^{L} A(t) dt by trapezoid rule in numpy's eigenbasis
    e, v = np.linalg.eigh(h)
    a_eig = v.conj().T @ a @ v
    omega = e[None, :] - e[:, None]
    period = 2 * np.pi / np.min(np.diff(e))
    big = 1e3 * period
    steps = int(40 * big * (e[-1] - e[0]) / (2 * np.pi))
    t = np.linspace(-big, big, 2 * steps + 1)
    avg = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            avg[i, j] = np.trapezoid(np.exp(1j * omega[i, j] * t), t) / (2 * big)
    oracle = v @ (a_eig * avg) @ v.conj().T
    assert np.max(np.abs(time_average(a, h) - oracle)) <= 1e-3


@given(seeds, dims)
def test_time_average_properties(seed, n):
    gen = np.random.default_rng(seed)
    h, _ = random_nondegenerate_h(gen, n)
    x = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
    a = x.conj().T @ x
    avg = time_average(a, h)
    assert np.allclose(time_average(avg, h), avg, atol=1e-10)
    assert np.trace(avg) == pytest.approx(np.trace(a), abs=1e-9)
    assert np.linalg.eigvalsh(avg)[0] >= -1e-10
    assert cstar_norm(avg @ h - h @ avg) <= 1e-10 * max(1.0, cstar_norm(a) * cstar_norm(h))


def test_ground_projector_examples():
    assert np.allclose(ground_projector(np.diag([1.0, -1.0])), np.diag([0, 1]), atol=0)
    with pytest.raises(DegenerateGround):
        ground_projector(np.eye(2))
    osc = build_truncation(8, 1.5)
    p0 = ground_projector(osc.hamiltonian)
    expected = np.zeros((8, 8))
    expected[0, 0] = 1
    assert np.allclose(p0, expected, atol=1e-14)


@given(seeds)
def test_ground_functional_two_level(seed):
    a = random_hermitian(np.random.default_rng(seed), 2)
    psi0 = ground_functional(np.diag([0.8, -0.8]))
    assert psi0(a) == pytest.approx(a[1, 1], abs=1e-15)
    assert psi0(np.eye(2)) == 1.0


@given(seeds, dims)
def test_ground_functional_properties(seed, n):
    gen = np.random.default_rng(seed)
    h, _ = random_nondegenerate_h(gen, n)
    psi0 = ground_functional(h)
    p0 = ground_projector(h)
    r = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
    s = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
    assert np.allclose(p0 @ r @ p0, psi0(r) * p0, atol=1e-10)
    assert psi0(r.conj().T @ r).real >= -1e-12
    assert psi0(r + 2j * s) == pytest.approx(psi0(r) + 2j * psi0(s), abs=1e-10)
    assert abs(psi0(r) - psi0(s)) <= cstar_norm(r - s) + 1e-12
    assert psi0(np.eye(n)) == pytest.approx(1.0, abs=1e-12)


def test_ergodicity_two_level():
    h = np.diag([1.0, -1.0])
    ctx = joint_context([T3])
    ground = int(np.argmin(np.diag(ctx.basis.conj().T @ T3 @ ctx.basis).real))
    phi0 = PhysicalState({ctx.id: ground}, 2)
    a = np.array([[3.0, 1 - 2j], [1 + 2j, -0.5]])
    rep = ergodicity_check(h, a, phi0, ctx)
    assert rep.psi0 == pytest.approx(-0.5)
    assert rep.ok and rep.gap <= 1e-10
    assert ergodicity_check(h, np.eye(2), phi0, ctx).phi0_of_average == pytest.approx(1.0)
    with pytest.raises(NotGroundState):
        ergodicity_check(h, a, PhysicalState({ctx.id: 1 - ground}, 2), ctx)


@given(seeds)
def test_ergodicity_random_5x5(seed):
    gen = np.random.default_rng(seed)
    h, _ = random_nondegenerate_h(gen, 5)
    a = random_hermitian(gen, 5)
    ctx, k = hamiltonian_context(h, a)
    rep = ergodicity_check(h, a, PhysicalState({ctx.id: k}, 5), ctx)
    assert rep.gap <= 1e-10
