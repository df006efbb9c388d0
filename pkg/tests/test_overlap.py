import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import contraction, unit_vector
from hermpower.errors import NonHermitianMethodError, PreconditionError
from hermpower.matrix import (GeneralSparseMatrix, SparseHermitianMatrix, gen_cycle_walk, gen_parity_chain,
                              gen_parity_chain_irreducible, gen_random_stable)
from hermpower.overlap import (check_stochastic, decompose, dense_power_oracle, matrix_power_element,
                               montecarlo_stochastic)

DIAG = SparseHermitianMatrix.from_dense(np.diag([0.5, -0.5]))
E1, E2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])


def random_vec(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def same_ray(x, y):
    return abs(abs(np.vdot(x, y)) - 1.0) <= 1e-12


def test_orthonormal_example():
    dec = decompose(E1, E2)
    (r1, r2), (i1, i2) = dec.real_part, dec.imag_part
    assert (r1.value, r2.value) == pytest.approx((1.0, -1.0), abs=1e-14)
    assert same_ray(r1.vector, (E1 + E2) / math.sqrt(2))
    assert same_ray(r2.vector, (E1 - E2) / math.sqrt(2))
    assert (i1.value, i2.value) == pytest.approx((1.0, -1.0), abs=1e-14)
    # i(v u^dag - u v^dag) is sigma_y here, whose +1 eigenvector is (e1 + i e2)/sqrt2
    assert same_ray(i1.vector, (E1 + 1j * E2) / math.sqrt(2))
    assert same_ray(i2.vector, (E1 - 1j * E2) / math.sqrt(2))
    assert not dec.parallel


def test_parallel_example():
    dec = decompose(E1, E1)
    assert dec.parallel
    assert dec.real_part[0].value == pytest.approx(2.0)
    assert same_ray(dec.real_part[0].vector, E1)
    assert dec.is_zero(dec.real_part[1].value)
    assert all(dec.is_zero(p.value) for p in dec.imag_part)
    assert len(dec.terms()) == 1
    one = decompose(np.array([2.0]), np.array([3j]))
    assert one.real_part[1].vector is None


def test_decompose_errors():
    with pytest.raises(PreconditionError):
        decompose(np.zeros(3), np.ones(3))
    with pytest.raises(PreconditionError):
        decompose(np.ones(3), np.ones(2))


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 8), seed=st.integers(0, 2 ** 32 - 1), parallel=st.booleans())
def test_decomposition_invariants(n, seed, parallel):
    rng = np.random.default_rng(seed)
    u = random_vec(rng, n)
    v = (0.3 - 1.1j) * u if parallel else random_vec(rng, n)
    dec = decompose(u, v)
    bound = 2 * np.linalg.norm(u) * np.linalg.norm(v)
    targets = {"real": np.outer(u, v.conj()) + np.outer(v, u.conj()),
               "imag": 1j * (np.outer(v, u.conj()) - np.outer(u, v.conj()))}
    for part, pairs in (("real", dec.real_part), ("imag", dec.imag_part)):
        assert np.max(np.abs(dec.reconstruct(part) - targets[part])) <= 1e-12 * max(bound, 1)
        vecs = [p.vector for p in pairs if p.vector is not None]
        for p in pairs:
            assert abs(p.value) <= bound * (1 + 1e-12)
        for x in vecs:
            assert abs(np.linalg.norm(x) - 1) <= 1e-12
        if len(vecs) == 2:
            assert abs(np.vdot(vecs[0], vecs[1])) <= 1e-12


def test_equal_vectors_saturate_bound(rng):
    u = random_vec(rng, 5)
    dec = decompose(u, u)
    assert dec.real_part[0].value == pytest.approx(2 * np.linalg.norm(u) ** 2, rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_rank_one_identity_against_dense(seed):
    rng = np.random.default_rng(seed)
    a = gen_random_stable(8, 3, 0.95, seed=seed)
    u, v = random_vec(rng, 8), random_vec(rng, 8)
    dec = decompose(u, v)
    dense = a.todense()
    for t in range(11):
        at = np.linalg.matrix_power(dense, t)
        overlaps = {(part, k): complex(np.vdot(p.vector, at @ p.vector)) for part, k, p in dec.terms()}
        assert abs(dec.combine(overlaps) - np.vdot(v, at @ u)) <= 1e-10 * max(1, dec.norm_u * dec.norm_v)


def test_dense_oracle_examples(rng):
    a = gen_random_stable(5, 2, 0.8, seed=3)
    u, v = random_vec(rng, 5), random_vec(rng, 5)
    assert dense_power_oracle(a, u, v, 0) == pytest.approx(np.vdot(v, u))
    assert dense_power_oracle(a, u, v, 1) == pytest.approx(np.vdot(v, a.todense() @ u))
    shift = GeneralSparseMatrix.from_dense(np.diag([1.0, 1.0], k=1))
    assert dense_power_oracle(shift, np.ones(3), np.ones(3), 3) == 0
    with pytest.raises(PreconditionError):
        dense_power_oracle(a, u, v, -1)


def test_parity_dense_example():
    a, u, v = gen_parity_chain([1, 0, 1])
    rep = matrix_power_element(a, u, v, 3, 0.1, "dense")
    assert rep.value == 1
    assert rep.ledger.calls_OF == 3 * a.nnz


def test_t0_returns_inner_product(rng):
    a = contraction(4, 2, seed=1)
    u, v = random_vec(rng, 4), random_vec(rng, 4)
    for method in ("dense", "walk-sample", "walk-lcu", "fourier"):
        assert matrix_power_element(a, u, v, 0, 0.1, method).value == pytest.approx(np.vdot(v, u), abs=1e-14)


def test_fourier_diag_example():
    rep = matrix_power_element(DIAG, E1, E1, 3, 0.01, "fourier")
    assert abs(rep.value - 0.125) <= 0.01
    assert rep.ledger.mode == "analytic"
    assert rep.extra["nonzero_terms"] == 1


def test_quantum_methods_reject_non_hermitian():
    a, u, v = gen_parity_chain([1, 1])
    for method in ("walk-sample", "walk-lcu", "fourier"):
        with pytest.raises(NonHermitianMethodError):
            matrix_power_element(a, u, v, 2, 0.1, method)
    with pytest.raises(PreconditionError):
        matrix_power_element(a, u, v, 2, 0.1, "magic")


def test_walk_methods_reject_small_bound():
    a = SparseHermitianMatrix.from_dense(np.diag([1.5, 0.5]))
    with pytest.raises(PreconditionError):
        matrix_power_element(a, E1, E2, 2, 0.1, "walk-lcu", c_bound=1.0)


@pytest.mark.parametrize("seed", range(4))
def test_method_agreement(seed):
    rng = np.random.default_rng(100 + seed)
    a = contraction(5, 3, seed=seed)
    u, v = unit_vector(rng, 5), unit_vector(rng, 5)
    t, eps = 5, 0.02
    ref = dense_power_oracle(a, u, v, t)
    lcu = matrix_power_element(a, u, v, t, eps, "walk-lcu", c_bound=1.0)
    fou = matrix_power_element(a, u, v, t, eps, "fourier")
    assert abs(lcu.value - ref) <= eps
    assert abs(fou.value - ref) <= eps
    assert lcu.internal_eps == pytest.approx(eps / 4)


def test_walk_sample_within_error():
    a = gen_cycle_walk(4)
    u = np.array([1.0, 0, 0, 0])
    v = np.array([0.5, 0.5j, 0, 0])
    rep = matrix_power_element(a, u, v, 4, 0.2, "walk-sample", seed=3)
    ref = dense_power_oracle(a, u, v, 4)
    assert abs(rep.value - ref) <= 4 * rep.std_error + 1e-12
    again = matrix_power_element(a, u, v, 4, 0.2, "walk-sample", seed=3)
    assert again.value == rep.value


def test_montecarlo_parity_is_exact():
    a, u, v = gen_parity_chain([1, 0, 1])
    rep = montecarlo_stochastic(a, u, v, 3, 0.1, seed=0)
    assert rep.value == 1
    assert rep.std_error == 0


def test_montecarlo_t0():
    a, _, _ = gen_parity_chain([1, 0])
    u = np.array([0.25, 0.25, 0.5, 0.0])
    v = np.array([1.0, 2.0, -1.0, 3.0])
    rep = montecarlo_stochastic(a, u, v, 0, 0.05, seed=1)
    assert abs(rep.value - 0.25) <= 4 * rep.std_error + 1e-12


def test_montecarlo_perturbed_chain():
    a = gen_parity_chain_irreducible([1, 0, 1], 1e-4)
    _, u, v = gen_parity_chain([1, 0, 1])
    ref = dense_power_oracle(a, u, v, 3)
    rep = montecarlo_stochastic(a, u, v, 3, 0.1, seed=2, samples=10 ** 5)
    assert abs(rep.value - ref) <= 4 * rep.std_error + 1e-12


def test_montecarlo_coverage():
    a = gen_parity_chain_irreducible([1, 1, 0], 0.05)
    rng = np.random.default_rng(9)
    u = np.abs(rng.standard_normal(6))
    v = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    ref = dense_power_oracle(a, u, v, 5)
    hits = 0
    for s in range(200):
        rep = montecarlo_stochastic(a, u, v, 5, 0.5, seed=s, samples=2000)
        hits += abs(rep.value - ref) <= 4 * rep.std_error
    assert hits >= 190


def test_montecarlo_rejects_non_stochastic():
    with pytest.raises(PreconditionError):
        check_stochastic(DIAG)
    with pytest.raises(PreconditionError):
        montecarlo_stochastic(GeneralSparseMatrix.from_dense([[0.5, 0], [0.5, 0.9]]), E1, E1, 1, 0.1)
    check_stochastic(gen_cycle_walk(5))


def test_montecarlo_sample_count():
    a = gen_cycle_walk(3)
    u = np.array([0.5, -0.5, 0.0])
    v = np.array([0.0, 2.0, 1.0])
    rep = montecarlo_stochastic(a, u, v, 2, 0.5, seed=0)
    assert rep.samples == math.ceil(4 * 1.0 * 4.0 / 0.25)
    assert abs(rep.value - dense_power_oracle(a, u, v, 2)) <= 4 * rep.std_error
