import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import contraction, unit_vector
from hermpower import chebyshev
from hermpower.errors import NonHermitianMethodError, PreconditionError
from hermpower.ledger import QueryLedger
from hermpower.matrix import GeneralSparseMatrix, SparseHermitianMatrix, gen_cycle_walk
from hermpower.walk import (HadamardTest, WalkSpace, build_lcu_operators, build_operators,
                            hadamard_sample, lcu_estimate, lcu_hadamard_probabilities, walk_identity_residual,
                            sampling_estimate)

HALF = SparseHermitianMatrix.from_dense(np.array([[0.5]]))
DIAG = SparseHermitianMatrix.from_dense(np.diag([0.5, -0.5]))


def phase_instance():
    """Complex off-diagonals, a negative diagonal and a negative real off-diagonal."""
    m = np.array([
        [-0.3, 0.2 + 0.1j, 0.0, -0.25],
        [0.2 - 0.1j, 0.1, 0.3j, 0.0],
        [0.0, -0.3j, -0.4, 0.1 - 0.2j],
        [-0.25, 0.0, 0.1 + 0.2j, 0.2],
    ])
    return SparseHermitianMatrix.from_dense(m)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 9), data=st.data())
def test_walk_space_bijection(n, data):
    sp = WalkSpace(n)
    k = data.draw(st.integers(0, sp.dim - 1))
    assert sp.index(*sp.unindex(k)) == k
    assert sp.dim == 2 * (n + 2) ** 2


def test_walk_space_bounds():
    sp = WalkSpace(2)
    with pytest.raises(IndexError):
        sp.index(4, 0, 0)
    with pytest.raises(IndexError):
        sp.unindex(sp.dim)
    psi = np.array([0.6, 0.8])
    np.testing.assert_array_equal(sp.project(sp.embed(psi)), psi)


def test_scalar_example():
    ops = build_operators(HALF)
    i = ops.space.index(1, 0, 0)
    assert ops.W[i, i] == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("n", [1, 3, 6, 12])
def test_unitarity(n):
    a = contraction(n, min(3, n), seed=n)
    res = build_operators(a, completion_seed=n).unitarity_residuals()
    assert max(res.values()) <= 1e-10


def test_preconditions():
    with pytest.raises(PreconditionError):
        build_operators(SparseHermitianMatrix.from_dense(np.diag([0.9, 0.3, 0.2]) + 0.2 * (1 - np.eye(3))))
    with pytest.raises(NonHermitianMethodError):
        build_operators(GeneralSparseMatrix.from_dense([[0, 0.5], [0, 0]]))


def test_walk_identity_m0_and_m1(rng):
    a = contraction(4, 3, seed=1)
    ops = build_operators(a)
    psi = unit_vector(rng, 4)
    assert walk_identity_residual(ops, a, psi, 0) == 0.0
    st1 = ops.W @ ops.space.embed(psi)
    np.testing.assert_allclose(ops.space.coin_zero(st1), ops.space.embed(a.matvec(psi)), atol=1e-14)


@pytest.mark.parametrize("seed", range(6))
def test_walk_identity_random(seed, rng):
    a = contraction(4, 3, seed=seed)
    ops = build_operators(a, completion_seed=seed)
    psi = unit_vector(rng, 4)
    assert max(walk_identity_residual(ops, a, psi, m) for m in range(11)) <= 1e-9


def test_walk_identity_phases_and_negative_diagonal(rng):
    a = phase_instance()
    assert max(abs(z) for z in np.abs(a.todense()).sum(axis=0)) <= 1
    for cs in (0, 1):
        ops = build_operators(a, completion_seed=cs)
        psi = unit_vector(rng, 4)
        assert max(walk_identity_residual(ops, a, psi, m) for m in range(13)) <= 1e-9


def test_completion_independence(rng):
    a = contraction(5, 3, seed=3)
    psi = unit_vector(rng, 5)
    o1, o2 = build_operators(a, 0), build_operators(a, 99)
    assert not np.allclose(o1.W, o2.W)
    for m in range(8):
        s1 = o1.space.coin_zero(o1.walk_power(o1.space.embed(psi), m))
        s2 = o2.space.coin_zero(o2.walk_power(o2.space.embed(psi), m))
        assert np.linalg.norm(s1 - s2) <= 1e-9


def test_hadamard_m0_always_plus_one():
    ops = build_operators(DIAG)
    rng = np.random.default_rng(0)
    psi = np.array([1, 1]) / math.sqrt(2)
    assert {hadamard_sample(ops, psi, 0, rng) for _ in range(50)} == {1}


def test_hadamard_scalar_statistics():
    ops = build_operators(HALF)
    test = HadamardTest(ops, [1.0])
    rng = np.random.default_rng(1)
    xs = test.sample_orders(np.ones(10 ** 5, dtype=int), rng)
    assert abs(xs.mean() - 0.5) <= 4 * xs.std() / math.sqrt(len(xs))
    assert test.expectation(1) == pytest.approx(0.5, abs=1e-15)


def test_hadamard_exact_expectation(rng):
    a = phase_instance()
    ops = build_operators(a)
    psi = unit_vector(rng, 4)
    test = HadamardTest(ops, psi)
    for m in range(12):
        ref = np.vdot(psi, chebyshev.apply_chebyshev(a, psi, m)).real
        assert abs(test.expectation(m) - ref) <= 1e-10
        assert test.probabilities(m).sum() == pytest.approx(1.0, abs=1e-12)


def test_hadamard_ledger_and_normalization():
    ops = build_operators(DIAG)
    led = QueryLedger()
    hadamard_sample(ops, [1.0, 0.0], 5, np.random.default_rng(0), led)
    assert led.calls_OF == 5 * 4 * DIAG.sparsity
    with pytest.raises(PreconditionError):
        hadamard_sample(ops, [1.0, 1e-3], 1, np.random.default_rng(0))


def test_sampling_t0():
    rep = sampling_estimate(DIAG, [1.0, 0.0], 0, 0.1, 1.0, seed=0)
    assert rep.value == 1.0
    assert rep.ledger.walk_steps == 0 and rep.ledger.calls_OF == 0


def test_sampling_diag_example():
    psi = np.array([1, 1]) / math.sqrt(2)
    rep = sampling_estimate(DIAG, psi, 2, 0.05, 1.0, seed=3)
    assert abs(rep.value - 0.25) <= 4 * rep.std_error
    assert rep.samples == math.ceil(4 / 0.05 ** 2)


def test_sampling_ledger_identity():
    a = gen_cycle_walk(6)
    psi = np.zeros(6)
    psi[0] = 1
    rep = sampling_estimate(a, psi, 36, 0.1, 1.0, seed=1)
    predicted = rep.samples * 4 * a.sparsity * rep.extra["expected_order"]
    assert abs(rep.ledger.calls_OF - predicted) <= 0.1 * predicted
    assert rep.ledger.calls_OF == 4 * a.sparsity * rep.ledger.walk_steps


def test_sampling_rescales_by_bound(rng):
    a = SparseHermitianMatrix.from_dense(np.diag([1.5, -0.75]))
    psi = np.array([0.6, 0.8])
    rep = sampling_estimate(a, psi, 2, 0.2, seed=4)
    assert rep.c_bound == 1.5
    exact = 0.36 * 1.5 ** 2 + 0.64 * 0.75 ** 2
    assert abs(rep.value - exact) <= 4 * rep.std_error
    with pytest.raises(PreconditionError):
        sampling_estimate(a, psi, 2, 0.2, c=1.0)


def test_sampling_is_seed_deterministic(rng):
    a = contraction(4, 2, seed=7)
    psi = unit_vector(rng, 4)
    r1 = sampling_estimate(a, psi, 9, 0.2, seed=11)
    r2 = sampling_estimate(a, psi, 9, 0.2, seed=11)
    assert r1.value == r2.value and r1.ledger.calls_OF == r2.ledger.calls_OF


def test_lcu_tau0_is_p0_identity(rng):
    a = contraction(3, 2, seed=2)
    ops = build_operators(a)
    w = chebyshev.weights(6)
    lcu = build_lcu_operators(ops, w, 0)
    psi = unit_vector(rng, 3)
    np.testing.assert_allclose(lcu.block_action(psi), ops.space.embed(w[0] * psi), atol=1e-14)


def test_lcu_t2_gives_square(rng):
    a = contraction(4, 3, seed=5)
    ops = build_operators(a)
    lcu = build_lcu_operators(ops, chebyshev.weights(2), 2)
    psi = unit_vector(rng, 4)
    target = ops.space.embed(a.matvec(a.matvec(psi)))
    assert np.linalg.norm(lcu.block_action(psi) - target) <= 1e-9


def test_lcu_unitarity_and_dense_agreement(rng):
    a = contraction(2, 2, seed=1)
    ops = build_operators(a)
    lcu = build_lcu_operators(ops, chebyshev.weights(5), 3)
    eye = np.eye(lcu.aux_dim)
    assert np.max(np.abs(lcu.VP.conj().T @ lcu.VP - eye)) <= 1e-10
    sel = lcu.dense_select()
    assert np.max(np.abs(sel.conj().T @ sel - np.eye(len(sel)))) <= 1e-10
    dense = lcu.dense()
    x = lcu.initial(unit_vector(rng, 2))
    np.testing.assert_allclose(dense @ x.ravel(), lcu.apply(x).ravel(), atol=1e-13)


def test_lcu_block_residual(rng):
    a = phase_instance()
    ops = build_operators(a)
    for tau in (0, 3, 8):
        lcu = build_lcu_operators(ops, chebyshev.weights(8), tau)
        assert lcu.block_residual(a, unit_vector(rng, 4)) <= 1e-9
    with pytest.raises(PreconditionError):
        build_lcu_operators(ops, chebyshev.weights(8), -1)


def test_lcu_observable_matches_block(rng):
    a = contraction(3, 3, seed=9)
    ops = build_operators(a)
    lcu = build_lcu_operators(ops, chebyshev.weights(7), 5)
    psi = unit_vector(rng, 3)
    p = lcu_hadamard_probabilities(lcu, psi)
    ref = np.vdot(psi, chebyshev.chebyshev_series(a, psi, lcu.probs)).real
    assert p[0] - p[1] == pytest.approx(ref, abs=1e-12)


def test_lcu_estimate_examples(rng):
    assert lcu_estimate(DIAG, [1.0, 0.0], 0, 0.01).value == 1.0
    rep = lcu_estimate(DIAG, [1.0, 0.0], 4, 0.01, c=1.0)
    assert abs(rep.value - 0.0625) <= 0.01 / 2 + 1e-9
    assert rep.ledger.mode == "analytic"
    assert rep.ledger.calls_OF == math.ceil(DIAG.sparsity * 2 / 0.01)


def test_lcu_exact_vs_sampling(rng):
    a = contraction(4, 3, seed=12)
    psi = unit_vector(rng, 4)
    exact = lcu_estimate(a, psi, 6, 0.02)
    samp = sampling_estimate(a, psi, 6, 0.05, seed=2)
    assert abs(exact.value - samp.value) <= 0.01 + 4 * samp.std_error
    sampled = lcu_estimate(a, psi, 6, 0.1, mode="sampled", seed=5)
    assert abs(sampled.value - exact.value) <= 0.05 + 4 * sampled.std_error
    assert sampled.ledger.mode == "counted"
    assert sampled.ledger.walk_steps == sampled.samples * sampled.extra["tau"]
    with pytest.raises(PreconditionError):
        lcu_estimate(a, psi, 6, 0.1, mode="bogus")
