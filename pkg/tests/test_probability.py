import numpy as np
import pytest
from hypothesis import given

from cqm.algebra import pauli
from cqm.contexts import joint_context, make_context, restrict
from cqm.errors import ContextMismatch, DimMismatch, NotInContext, NotPositive, ValidationError
from cqm.experiments import (analyser_direction, pair_observables, setting_context, singlet,
                             spin1_squares)
from cqm.probability import (MeasurementConfig, SampleSet, StateFunctional, born_weights,
                             empirical_marginal, empirical_mean, empirical_stderr,
                             marginal_distribution, merge_samples, quantum_average, sample)
from cqm.states import prepare, prepare_vector

from conftest import dims, random_density, random_unitary, seeds
from test_states import spin1_two_frames

T1, T2, T3 = pauli()


def x_plus():
    return prepare_vector(np.array([1.0, 1.0]) / np.sqrt(2))[0]


def test_repeat_measurement():
    ctx = make_context(random_unitary(np.random.default_rng(0), 3))
    assert np.allclose(born_weights(prepare(ctx, 0), ctx), [1, 0, 0], atol=1e-15)


def test_x_plus_in_z_basis():
    w = born_weights(x_plus(), joint_context([T3]))
    assert w == pytest.approx([0.5, 0.5], abs=1e-15)
    with pytest.raises(DimMismatch):
        born_weights(x_plus(), make_context(np.eye(3)))


@pytest.mark.parametrize("alpha,beta", [(0.0, np.pi / 8), (0.3, 1.1), (np.pi / 4, 3 * np.pi / 8)])
def test_singlet_weights_against_brute_force(alpha, beta):
    ctx, _ = setting_context(alpha, beta)
    prep, _ = prepare_vector(singlet())
    w = born_weights(prep, ctx)
    psi = singlet()
    brute = np.array([abs(np.vdot(ctx.basis[:, k], psi)) ** 2 for k in range(4)])
    assert np.allclose(w, brute, atol=1e-14)
    a, b = pair_observables(analyser_direction(alpha), analyser_direction(beta))
    # outcome products +-1/4 appear with weights (1 -+ cos theta)/4
    cos_t = float(np.dot(analyser_direction(alpha), analyser_direction(beta)))
    prod = restrict(a @ b, ctx)
    assert w[prod > 0].sum() == pytest.approx((1 - cos_t) / 2, abs=1e-12)
    assert sorted(w) == pytest.approx(sorted([(1 - cos_t) / 4] * 2 + [(1 + cos_t) / 4] * 2), abs=1e-12)


def test_single_trial_certain_outcome():
    ctx = joint_context([T3])
    s = sample(MeasurementConfig(prepare(ctx, 0), ctx, 1, 3))
    assert list(s.outcome_counts) == [1, 0]


def test_fair_coin_counts():
    ctx = joint_context([T3])
    s = sample(MeasurementConfig(x_plus(), ctx, 10**6, 2024))
    for c in s.outcome_counts:
        assert abs(c - 500_000) <= 5 * np.sqrt(10**6 / 4)
    assert empirical_mean(s, np.eye(2), ctx) == 1.0
    assert abs(empirical_mean(s, T3, ctx)) <= 0.005
    assert empirical_stderr(s, T3, ctx) == pytest.approx(1e-3, rel=1e-3)


def test_sampling_is_deterministic_and_parallel_invariant():
    ctx = make_context(random_unitary(np.random.default_rng(1), 4))
    prep = prepare(make_context(random_unitary(np.random.default_rng(2), 4)), 1)
    cfg = MeasurementConfig(prep, ctx, 100_003, 77)
    base = sample(cfg)
    assert np.array_equal(base.outcome_counts, sample(cfg).outcome_counts)
    assert np.array_equal(base.outcome_counts, sample(cfg, workers=4, chunk=1000).outcome_counts)
    assert np.array_equal(base.outcome_counts, sample(cfg, workers=1, chunk=7919).outcome_counts)


def test_cross_context_statistics_refused():
    z, x = joint_context([T3]), joint_context([T1])
    sz = sample(MeasurementConfig(x_plus(), z, 100, 0))
    sx = sample(MeasurementConfig(x_plus(), x, 100, 0))
    with pytest.raises(ContextMismatch):
        merge_samples(sz, sx)
    with pytest.raises(ContextMismatch):
        empirical_mean(sz, T1, x)
    merged = merge_samples(sz, sample(MeasurementConfig(x_plus(), z, 50, 1)))
    assert merged.trials == 150 and merged.outcome_counts.sum() == 150


def test_config_validation():
    ctx = joint_context([T3])
    with pytest.raises(ValidationError):
        MeasurementConfig(prepare(ctx, 0), ctx, 0, 1)


def test_sample_set_serialisation():
    ctx = joint_context([T3])
    s = sample(MeasurementConfig(x_plus(), ctx, 1000, 5))
    back = SampleSet.from_json(s.to_json())
    assert np.array_equal(back.outcome_counts, s.outcome_counts)
    lines = s.to_csv().splitlines()
    assert lines[0] == "context_id,outcome,count"
    assert lines[1].startswith(ctx.id + ",0,")
    bad = s.to_json()
    bad["trials"] += 1
    with pytest.raises(ValidationError):
        SampleSet.from_json(bad)


def test_state_functional_validation():
    with pytest.raises(ValidationError):
        StateFunctional(np.diag([0.5, 0.6]))
    with pytest.raises(NotPositive):
        StateFunctional(np.diag([1.5, -0.5]))
    psi = StateFunctional.from_state(x_plus())
    assert quantum_average(psi, x_plus().projector) == pytest.approx(1.0, abs=1e-15)
    assert quantum_average(psi, T1 + T3) == pytest.approx(quantum_average(psi, T1) + quantum_average(psi, T3))
    with pytest.raises(DimMismatch):
        quantum_average(psi, np.eye(3))


def test_marginals_of_spin1_square():
    _, ctxs = spin1_two_frames()
    sx2 = spin1_squares([1, 0, 0])
    z0, _ = prepare_vector(np.array([0.0, 0.0, 1.0]))
    for ctx in ctxs:
        m = marginal_distribution(z0, ctx, sx2)
        assert m[0.0] == pytest.approx(0.0, abs=1e-15)
        assert m[1.0] == pytest.approx(1.0, abs=1e-15)
    assert marginal_distribution(z0, ctxs[0], np.eye(3)) == pytest.approx({1.0: 1.0})
    with pytest.raises(NotInContext):
        marginal_distribution(z0, ctxs[0], spin1_squares([1, 1, 0]))


@given(seeds)
def test_marginals_device_independent(seed):
    gen = np.random.default_rng(seed)
    _, ctxs = spin1_two_frames(angle=float(gen.uniform(0.1, 1.4)))
    v = gen.standard_normal(3) + 1j * gen.standard_normal(3)
    prep, _ = prepare_vector(v)
    sx2 = spin1_squares([1, 0, 0])
    m1, m2 = (marginal_distribution(prep, c, sx2) for c in ctxs)
    assert m1.keys() == m2.keys()
    for k in m1:
        assert abs(m1[k] - m2[k]) <= 1e-10


def test_empirical_marginal_keys():
    ctx = joint_context([T3])
    s = sample(MeasurementConfig(x_plus(), ctx, 4000, 9))
    m = empirical_marginal(s, T3, ctx)
    assert set(m) == {-1.0, 1.0}
    assert sum(m.values()) == pytest.approx(1.0)


@given(seeds, dims)
def test_cauchy_schwarz(seed, n):
    gen = np.random.default_rng(seed)
    psi = StateFunctional(random_density(gen, n, rank=int(gen.integers(1, n + 1))))
    r = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
    s = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
    lhs = abs(psi(r.conj().T @ s)) ** 2
    rhs = psi(r.conj().T @ r).real * psi(s.conj().T @ s).real
    assert lhs <= rhs * (1 + 1e-10) + 1e-12


@given(seeds, dims)
def test_average_of_hermitian_is_real(seed, n):
    gen = np.random.default_rng(seed)
    psi = StateFunctional(random_density(gen, n))
    a = gen.standard_normal((n, n))
    a = a + a.T
    assert abs(quantum_average(psi, a).imag) <= 1e-12


def test_empirical_mean_converges_to_quantum_average():
    gen = np.random.default_rng(4)
    ctx = make_context(random_unitary(gen, 3))
    d = np.array([-1.0, 0.5, 2.0])
    a = ctx.basis @ np.diag(d) @ ctx.basis.conj().T
    prep = prepare(make_context(random_unitary(gen, 3)), 0)
    exact = quantum_average(StateFunctional.from_state(prep), a).real
    spread = d.max() - d.min()
    misses = 0
    for seed in range(100):
        s = sample(MeasurementConfig(prep, ctx, 10**6, seed))
        misses += abs(empirical_mean(s, a, ctx) - exact) > 5 * spread / np.sqrt(10**6)
    assert misses <= 1
