import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccfrelay.errors import IndexOutOfRangeError, SingularMatrixError
from ccfrelay.galois import (
    FieldMatrix,
    FieldScalar,
    feasible_pi_d,
    feasible_pi_e,
    identity_matrix,
    is_permutation,
    kappa,
    kappa_inv,
    mat_inverse,
    mat_rank,
    mat_solve,
    perm_inverse,
    residual_submatrix,
    srm_index_sets,
    srq_index_sets,
)

PRIMES = (2, 3, 5, 7)


def brute_rank(entries, gamma):
    """Rank oracle: largest k with a k x k submatrix of nonzero determinant,
    determinant computed exactly by cofactor expansion mod gamma."""

    def det(mat):
        n = len(mat)
        if n == 1:
            return mat[0][0] % gamma
        total = 0
        for j in range(n):
            minor = [row[:j] + row[j + 1 :] for row in mat[1:]]
            total += (-1) ** j * mat[0][j] * det(minor)
        return total % gamma

    ent = [[int(x) for x in row] for row in entries]
    rows, cols = len(ent), len(ent[0])
    for k in range(min(rows, cols), 0, -1):
        for ri in itertools.combinations(range(rows), k):
            for ci in itertools.combinations(range(cols), k):
                sub = [[ent[r][c] for c in ci] for r in ri]
                if det(sub) != 0:
                    return k
    return 0


def random_matrix(rng, rows, cols, gamma):
    return FieldMatrix(rng.integers(-gamma, gamma + 1, size=(rows, cols)), gamma)


def test_scalar_canonical_range():
    s = FieldScalar(-1, 5)
    assert s.value == 4
    assert FieldScalar(9, 5) == FieldScalar(4, 5)


def test_matrix_rejects_nonprime_modulus():
    with pytest.raises(ValueError):
        FieldMatrix(np.eye(2, dtype=np.int64), 6)


def test_kappa_roundtrip_exhaustive():
    for gamma in (2, 5):
        for v in range(gamma):
            assert kappa_inv(kappa(FieldScalar(v, gamma)), gamma) == FieldScalar(v, gamma)
        M = FieldMatrix(np.arange(4).reshape(2, 2), gamma)
        assert kappa_inv(kappa(M), gamma) == M


def test_rank_matches_brute_force():
    rng = np.random.default_rng(7)
    for _ in range(120):
        gamma = int(rng.choice(PRIMES))
        rows = int(rng.integers(1, 5))
        cols = int(rng.integers(1, 5))
        M = random_matrix(rng, rows, cols, gamma)
        assert mat_rank(M) == brute_rank(M.entries.tolist(), gamma)


def test_inverse_roundtrip_and_singular_detection():
    rng = np.random.default_rng(8)
    for _ in range(150):
        gamma = int(rng.choice(PRIMES))
        L = int(rng.integers(1, 5))
        M = random_matrix(rng, L, L, gamma)
        if mat_rank(M) == L:
            inv = mat_inverse(M)
            assert np.array_equal((inv.entries @ M.entries) % gamma, np.eye(L, dtype=np.int64))
            assert np.array_equal((M.entries @ inv.entries) % gamma, np.eye(L, dtype=np.int64))
        else:
            with pytest.raises(SingularMatrixError):
                mat_inverse(M)


def test_solve_agrees_with_inverse():
    rng = np.random.default_rng(9)
    for _ in range(50):
        gamma = int(rng.choice(PRIMES))
        L = int(rng.integers(1, 4))
        while True:
            M = random_matrix(rng, L, L, gamma)
            if mat_rank(M) == L:
                break
        b = rng.integers(0, gamma, size=(L, 2))
        x = mat_solve(M, b)
        assert np.array_equal((M.entries @ x) % gamma, b % gamma)


def test_identity_matrix():
    I = identity_matrix(3, 5)
    assert np.array_equal(I.entries, np.eye(3, dtype=np.int64))
    assert mat_rank(I) == 3


def test_residual_submatrix_indexing():
    M = FieldMatrix(np.arange(9).reshape(3, 3), 11)
    sub = residual_submatrix(M, sources=(1, 3), relays=(2, 3))
    # rows pick relays, columns pick sources, both ascending and 1-based
    assert np.array_equal(sub.entries, np.array([[3, 5], [6, 8]]))
    with pytest.raises(IndexOutOfRangeError):
        residual_submatrix(M, sources=(0,), relays=(1,))
    with pytest.raises(IndexOutOfRangeError):
        residual_submatrix(M, sources=(1,), relays=(4,))


def test_permutation_helpers():
    assert is_permutation((2, 3, 1), 3)
    assert not is_permutation((1, 1, 2), 3)
    assert perm_inverse((2, 3, 1)) == (3, 1, 2)


def test_index_sets_definition():
    pi_c = (2, 1, 3)
    pi_d = (3, 1, 2)
    s = srq_index_sets(pi_c, pi_d, 2)
    assert s.sourceSet == (1, 2)
    assert s.relaySet == (2, 3)
    pi_s = (1, 3, 2)
    pi_e = (2, 1, 3)
    s = srm_index_sets(pi_s, pi_e, 2)
    assert s.sourceSet == (2, 3)
    assert s.relaySet == (1, 3)


def brute_feasible_pi_d(Q, pi_c):
    L = Q.rows
    for pd in itertools.permutations(range(1, L + 1)):
        if all(
            mat_rank(residual_submatrix(Q, *_sets_q(pi_c, pd, j))) == j for j in range(1, L + 1)
        ):
            yield pd


def _sets_q(pi_c, pi_d, j):
    s = srq_index_sets(pi_c, pi_d, j)
    return s.sourceSet, s.relaySet


def _sets_m(pi_s, pi_e, i):
    s = srm_index_sets(pi_s, pi_e, i)
    return s.sourceSet, s.relaySet


def test_greedy_constructors_produce_feasible_permutations():
    rng = np.random.default_rng(10)
    for _ in range(200):
        gamma = int(rng.choice(PRIMES))
        L = int(rng.integers(2, 5))
        while True:
            Q = random_matrix(rng, L, L, gamma)
            if mat_rank(Q) == L:
                break
        pi_c = tuple(int(x) for x in rng.permutation(L) + 1)
        pi_s = tuple(int(x) for x in rng.permutation(L) + 1)
        pd = feasible_pi_d(Q, pi_c)
        pe = feasible_pi_e(Q, pi_s)
        assert is_permutation(pd, L) and is_permutation(pe, L)
        for j in range(1, L + 1):
            assert mat_rank(residual_submatrix(Q, *_sets_q(pi_c, pd, j))) == j
        for i in range(1, L + 1):
            assert mat_rank(residual_submatrix(Q, *_sets_m(pi_s, pe, i))) == L - i + 1


def test_greedy_pi_d_is_in_brute_force_feasible_set():
    rng = np.random.default_rng(11)
    for _ in range(40):
        gamma = int(rng.choice((2, 3)))
        L = 3
        while True:
            Q = random_matrix(rng, L, L, gamma)
            if mat_rank(Q) == L:
                break
        pi_c = tuple(int(x) for x in rng.permutation(L) + 1)
        assert feasible_pi_d(Q, pi_c) in set(brute_feasible_pi_d(Q, pi_c))


@given(
    st.integers(min_value=-1000, max_value=1000),
    st.sampled_from(PRIMES),
)
@settings(max_examples=100, deadline=None)
def test_scalar_canonicalization(value, gamma):
    s = FieldScalar(value, gamma)
    assert 0 <= s.value < gamma
    assert (s.value - value) % gamma == 0


@given(st.integers(min_value=2, max_value=60))
@settings(max_examples=60, deadline=None)
def test_modulus_primality_enforced(gamma):
    is_prime = gamma >= 2 and all(gamma % d for d in range(2, int(gamma**0.5) + 1))
    if is_prime:
        FieldScalar(0, gamma)
    else:
        with pytest.raises(ValueError):
            FieldScalar(0, gamma)
