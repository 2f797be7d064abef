import itertools

import numpy as np
import pytest

from ccfrelay.errors import ConfigError, NotFullRankError
from ccfrelay.galois import FieldMatrix, mat_rank, residual_submatrix, srm_index_sets, srq_index_sets
from ccfrelay.optimizer import (
    OptimizerConfig,
    _Fast2,
    _ScalarRows,
    _grid_rows,
    _power_grid,
    enumerate_feasible_permutations,
    evaluate_all,
    evaluate_scheme,
    gram_context,
    gram_matrix,
    is_size_reduced,
    is_unimodular,
    lll_reduce,
    optimize_sum_rate,
    satisfies_lovasz,
    select_coefficients,
)
from ccfrelay.pipeline import ChannelInstance, mmse_noise_power


def test_config_validation():
    with pytest.raises(ConfigError):
        OptimizerConfig(nBrute=0)
    with pytest.raises(ConfigError):
        OptimizerConfig(lllDelta=1.0)
    with pytest.raises(ConfigError):
        OptimizerConfig(schemeVariant="nope")


def test_gram_matrix_matches_noise_power():
    rng = np.random.default_rng(0)
    for _ in range(100):
        L = int(rng.integers(1, 5))
        h = rng.normal(size=L)
        p = rng.uniform(0.1, 30.0, size=L)
        D = gram_matrix(h, p)
        a = rng.integers(-5, 6, size=L).astype(float)
        assert abs(a @ D @ a - mmse_noise_power(h, a, p)) <= 1e-10
        ctx = gram_context(h, p)
        np.testing.assert_allclose(ctx.L_m @ ctx.L_m.T, D, atol=1e-10)


def test_lll_identity_is_fixed_point():
    red, T = lll_reduce(np.eye(3), 0.75)
    np.testing.assert_allclose(red, np.eye(3))
    assert np.array_equal(T, np.eye(3, dtype=np.int64))


def test_lll_shortens_skewed_basis():
    B = np.array([[1.0, 0.0], [0.99, 1.0]])
    red, T = lll_reduce(B, 0.75)
    assert np.linalg.norm(red[0]) <= np.linalg.norm(B[1])
    assert is_unimodular(T)
    np.testing.assert_allclose(red, T @ B)


def test_lll_contract_on_random_bases():
    rng = np.random.default_rng(1)
    for _ in range(200):
        n = int(rng.integers(2, 7))
        B = rng.normal(size=(n, n))
        while abs(np.linalg.det(B)) < 1e-6:
            B = rng.normal(size=(n, n))
        red, T = lll_reduce(B, 0.75)
        assert is_size_reduced(red)
        assert satisfies_lovasz(red, 0.75)
        assert is_unimodular(T)
        np.testing.assert_allclose(red, T @ B, atol=1e-8)


def test_lll_rejects_rank_deficient():
    with pytest.raises(NotFullRankError):
        lll_reduce(np.array([[1.0, 2.0], [2.0, 4.0]]), 0.75)


def brute_best_row(D, gamma, max_coeff, exclude=None):
    """Smallest-metric integer row, nonzero mod gamma, optionally linearly
    independent mod gamma from a previous row."""
    best = None
    L = D.shape[0]
    for cand in itertools.product(range(-max_coeff, max_coeff + 1), repeat=L):
        a = np.array(cand)
        if not np.any(a % gamma):
            continue
        if exclude is not None:
            stack = FieldMatrix(np.stack([exclude, a]), gamma)
            if mat_rank(stack) < 2:
                continue
        met = float(a @ D @ a)
        if best is None or met < best - 1e-12:
            best = met
    return best


def test_select_coefficients_L1():
    cfg = OptimizerConfig()
    A = select_coefficients(np.array([[1.3]]), np.array([2.0]), 257, cfg)
    assert A.shape == (1, 1) and abs(A[0, 0]) == 1


def test_select_coefficients_matches_brute_force_L2():
    cfg = OptimizerConfig()
    rng = np.random.default_rng(2)
    for _ in range(60):
        H = rng.normal(size=(2, 2))
        p = rng.uniform(0.5, 50.0, size=2)
        A = select_coefficients(H, p, 257, cfg)
        assert mat_rank(FieldMatrix(A, 257)) == 2
        for m in range(2):
            D = gram_matrix(H[m], p)
            met = float(A[m] @ D @ A[m])
            exclude = A[0] if m == 1 else None
            best = brute_best_row(D, 257, 10, exclude=exclude)
            assert met <= best + 1e-9


def test_select_coefficients_diagonal_channel():
    cfg = OptimizerConfig()
    H = np.diag([5.0, -5.0, 5.0])
    p = np.ones(3)
    A = select_coefficients(H, p, 257, cfg)
    assert np.array_equal(np.abs(A), np.eye(3, dtype=np.int64))


def test_select_coefficients_always_full_rank():
    cfg = OptimizerConfig()
    rng = np.random.default_rng(3)
    for _ in range(200):
        L = int(rng.integers(1, 5))
        H = rng.normal(size=(L, L))
        p = rng.uniform(0.2, 100.0, size=L)
        A = select_coefficients(H, p, cfg.gammaOpt, cfg)
        assert mat_rank(FieldMatrix(A, cfg.gammaOpt)) == L


def brute_feasible_pairs(Q):
    L = Q.rows
    pi_c = tuple(range(1, L + 1))
    pi_s = tuple(range(1, L + 1))
    out = set()
    for pd in itertools.permutations(range(1, L + 1)):
        for pe in itertools.permutations(range(1, L + 1)):
            ok = all(
                mat_rank(
                    residual_submatrix(
                        Q, srq_index_sets(pi_c, pd, j).sourceSet, srq_index_sets(pi_c, pd, j).relaySet
                    )
                )
                == j
                for j in range(1, L + 1)
            ) and all(
                mat_rank(
                    residual_submatrix(
                        Q, srm_index_sets(pi_s, pe, i).sourceSet, srm_index_sets(pi_s, pe, i).relaySet
                    )
                )
                == L - i + 1
                for i in range(1, L + 1)
            )
            if ok:
                out.add((pd, pe))
    return out


def test_enumerate_matches_brute_force():
    Q = FieldMatrix(np.array([[1, 1], [1, 0]]), 2)
    pi = (1, 2)
    got = set(enumerate_feasible_permutations(Q, pi, pi))
    assert got == brute_feasible_pairs(Q)
    I = FieldMatrix(np.eye(2, dtype=np.int64), 3)
    assert ((1, 2), (1, 2)) in set(enumerate_feasible_permutations(I, pi, pi))


def test_feasible_pairs_nonempty_on_full_rank():
    rng = np.random.default_rng(4)
    for _ in range(100):
        gamma = int(rng.choice((2, 3, 257)))
        L = int(rng.integers(2, 5))
        while True:
            Q = FieldMatrix(rng.integers(0, gamma, size=(L, L)), gamma)
            if mat_rank(Q) == L:
                break
        pi_c = tuple(int(x) for x in rng.permutation(L) + 1)
        pi_s = tuple(int(x) for x in rng.permutation(L) + 1)
        assert next(iter(enumerate_feasible_permutations(Q, pi_c, pi_s)), None) is not None


def test_power_grid_shape():
    grid = _power_grid(8.0, 5)
    assert len(grid) == 5
    assert grid[-1] == 8.0
    assert np.all(grid > 8.0 / 5)
    assert np.all(np.diff(grid) > 0)
    assert _power_grid(8.0, 1).tolist() == [8.0]


def test_grid_rows_cap():
    cfg = OptimizerConfig(nBrute=100, maxGridRows=1000)
    rows = _grid_rows(np.full(3, 8.0), False, cfg)
    assert rows.shape[0] <= 1000
    assert rows.shape[1] == 3
    common = _grid_rows(np.full(3, 8.0), True, cfg)
    assert common.shape == (100, 3)
    assert np.all(common[:, 0] == common[:, 1])


def test_fast_matches_scalar_L2():
    cfg = OptimizerConfig(nBrute=8)
    rng = np.random.default_rng(5)
    for _ in range(40):
        H = rng.normal(size=(2, 2))
        g = rng.normal(size=2)
        P = 10 ** rng.uniform(0.0, 2.4)
        caps = 0.5 * np.log2(1.0 + g * g * 0.25 * P)
        rows = _grid_rows(np.full(2, P), False, cfg)
        fast = _Fast2(H, caps, rows, cfg.gammaOpt)
        slow = _ScalarRows(H, caps, rows, cfg.gammaOpt, cfg)
        for variant in ("symmetric", "srq", "srm", "srmq"):
            f = fast.evaluate(variant)
            s = slow.evaluate(variant)
            assert (f is None) == (s is None)
            if f is not None:
                assert abs(f[0] - s[0]) <= 1e-9


def test_reported_rates_match_search_value():
    # the winner is rebuilt as a full assignment and its rates recomputed
    # analytically; both paths must agree
    cfg = OptimizerConfig(nBrute=10)
    rng = np.random.default_rng(6)
    for _ in range(20):
        L = int(rng.choice((2, 3)))
        H = rng.normal(size=(L, L))
        g = rng.normal(size=L)
        ch = ChannelInstance(H, g, np.full(L, 50.0), np.full(L, 12.5))
        for scheme, (asg, report) in evaluate_all(ch, cfg).items():
            assert report.feasible
            if asg is not None:
                assert report.sumRate >= 0.0


def test_scheme_dominance_random_draws():
    cfg = OptimizerConfig(nBrute=10)
    rng = np.random.default_rng(7)
    for _ in range(60):
        H = rng.normal(size=(2, 2))
        g = rng.normal(size=2)
        P = 10 ** rng.uniform(0.0, 2.0)
        ch = ChannelInstance(H, g, np.full(2, P), np.full(2, 0.25 * P))
        res = {s: rep.sumRate for s, (_, rep) in evaluate_all(ch, cfg).items()}
        tol = 1e-9
        assert res["scf"] <= res["scf-q"] + tol
        assert res["scf"] <= res["acf"] + tol
        assert res["acf"] <= res["acf-m"] + tol
        assert res["acf-m"] <= res["acf-mq"] + tol


def test_determinism():
    cfg = OptimizerConfig(nBrute=12)
    ch = ChannelInstance(
        np.array([[0.4, -1.2], [0.8, 0.3]]), np.array([1.1, -0.7]), np.full(2, 30.0), np.full(2, 7.5)
    )
    a = {s: rep.sumRate for s, (_, rep) in evaluate_all(ch, cfg).items()}
    b = {s: rep.sumRate for s, (_, rep) in evaluate_all(ch, cfg).items()}
    assert a == b


def test_optimize_and_evaluate_wrappers():
    cfg = OptimizerConfig(nBrute=10, schemeVariant="acf-mq")
    ch = ChannelInstance(
        np.array([[0.9, 0.2], [-0.5, 1.4]]), np.array([0.8, 1.3]), np.full(2, 20.0), np.full(2, 5.0)
    )
    asg, report = optimize_sum_rate(ch, cfg)
    assert report.sumRate == evaluate_scheme("acf-mq", ch, cfg).sumRate
    assert asg is None or asg.field_image_full_rank()
    with pytest.raises(ConfigError):
        evaluate_all(ch, cfg, ("bogus",))
