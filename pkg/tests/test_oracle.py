import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from olsfs import (
    cca_eigen,
    definition_greedy_select,
    encode_response_multinomial,
    exhaustive_select,
    feature_blocks,
    lda_fisher,
    multiple_correlation_definition,
    multiple_correlation_sq_via_socc,
    ols_intercept_check,
    select_multinomial,
)
from olsfs.linalg import DegenerateInputError, center_columns
from olsfs.oracle import SingularMatrixError

seeds = st.integers(0, 2 ** 32 - 1)


def _grouped(rng, N, n, c, shift=0.8):
    labels = rng.permutation(np.concatenate([np.arange(c).repeat(2), rng.integers(0, c, N - 2 * c)]))
    X = rng.standard_normal((N, n))
    X[:, 0] += shift * labels
    return X, labels


class TestMultipleCorrelation:
    def test_single_feature(self, rng):
        x, y = rng.standard_normal((2, 15))
        assert multiple_correlation_definition(x, y) == pytest.approx(np.corrcoef(x, y)[0, 1] ** 2)

    def test_orthogonal(self):
        X = np.array([[1.0], [-1.0], [1.0], [-1.0]])
        assert multiple_correlation_definition(X, [1.0, 1.0, -1.0, -1.0]) == pytest.approx(0.0)

    def test_random_matches_socc(self, rng):
        X = center_columns(rng.standard_normal((15, 3))).values
        y = X @ [1.0, 0.0, -1.0] + rng.standard_normal(15)
        a = multiple_correlation_definition(X, y - y.mean())
        assert a == pytest.approx(multiple_correlation_sq_via_socc(X, y - y.mean()), abs=1e-10)

    def test_singular_needs_pseudo(self, rng):
        X = rng.standard_normal((10, 2))
        X = np.column_stack([X, X[:, 0]])
        y = rng.standard_normal(10)
        with pytest.raises(SingularMatrixError, match=r"dependent columns \[2\]"):
            multiple_correlation_definition(X, y)
        full = multiple_correlation_definition(X[:, :2], y)
        assert multiple_correlation_definition(X, y, pseudo=True) == pytest.approx(full)


class TestCca:
    def test_iris_triple(self, iris):
        features, _, Y = iris
        res = cca_eigen(features.values[:, [2, 3, 1]], Y)
        np.testing.assert_allclose(res.eigenvalues, [0.9905, 0.5626], atol=5e-5)
        assert res.count == 2

    def test_single_response_column(self, rng):
        X = rng.standard_normal((12, 3))
        y = X[:, 0] + rng.standard_normal(12)
        res = cca_eigen(X, y)
        assert res.count == 1
        assert res.eigenvalues[0] == pytest.approx(multiple_correlation_definition(X, y - y.mean()))

    def test_self_correlation(self, rng):
        X = rng.standard_normal((6, 2))
        np.testing.assert_allclose(cca_eigen(X, X).eigenvalues, [1.0, 1.0], atol=1e-10)

    def test_constant_column(self, rng):
        X = np.column_stack([rng.standard_normal(6), np.ones(6)])
        with pytest.raises(DegenerateInputError, match=r"constant columns \[1\]"):
            cca_eigen(X, rng.standard_normal(6))
        assert cca_eigen(X, rng.standard_normal(6), pseudo=True).count == 1

    def test_singular_names_columns(self, rng):
        X = rng.standard_normal((10, 2))
        with pytest.raises(SingularMatrixError, match="R_XX"):
            cca_eigen(np.column_stack([X, X.sum(axis=1)]), rng.standard_normal((10, 2)))

    @given(seeds, st.integers(1, 4), st.integers(1, 3))
    @settings(max_examples=50)
    def test_eigen_residual_and_range(self, seed, n, m):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((20, n))
        Y = rng.standard_normal((20, m)) + X[:, :1]
        res = cca_eigen(X, Y)
        vals = res.eigenvalues
        assert res.count == min(n, m)
        assert np.all(np.diff(vals) <= 0)
        assert np.all((vals >= 0) & (vals <= 1 + 1e-9))
        for k in range(res.count):
            a = res.directions[:, k]
            resid = res.matrix @ a - vals[k] * a
            assert np.linalg.norm(resid) <= 1e-8 * np.linalg.norm(a)


class TestLda:
    def test_iris_scatter_and_criteria(self, iris):
        features, labels, _ = iris
        res = lda_fisher(features.values[:, [2, 3, 1]], labels)
        np.testing.assert_allclose(res.S_w, [[0.5067, 0.2367, 0.2700],
                                             [0.2367, 0.1917, 0.1800],
                                             [0.2700, 0.1800, 0.3050]], atol=5e-5)
        np.testing.assert_allclose(res.S_b, [[22.4305, 10.1333, -1.1886],
                                             [10.1333, 4.6483, -0.5800],
                                             [-1.1886, -0.5800, 0.0893]], atol=5e-5)
        np.testing.assert_allclose(res.fisher_criteria, [104.1481, 1.2864], atol=5e-5)

    def test_equal_means(self):
        X = np.array([[1.0], [-1.0], [1.0], [-1.0]])
        J = lda_fisher(X, [0, 0, 1, 1]).fisher_criteria
        np.testing.assert_allclose(J, [0.0], atol=1e-15)

    def test_singular_within_scatter(self, rng):
        X = rng.standard_normal((8, 1))
        with pytest.raises(SingularMatrixError, match="S_w"):
            lda_fisher(np.column_stack([X, 2 * X]), [0, 1] * 4)

    def test_label_count_mismatch(self, rng):
        with pytest.raises(ValueError):
            lda_fisher(rng.standard_normal((4, 1)), [0, 1, 0])

    @given(seeds, st.integers(1, 5), st.integers(2, 4))
    @settings(max_examples=50)
    def test_fisher_matches_canonical_map(self, seed, n, c):
        rng = np.random.default_rng(seed)
        X, labels = _grouped(rng, 30, n, c)
        res = lda_fisher(X, labels)
        assert np.allclose(res.S_w, res.S_w.T, rtol=1e-9)
        assert np.allclose(res.S_b, res.S_b.T, rtol=1e-9)
        R2 = cca_eigen(X, encode_response_multinomial(labels)).eigenvalues
        k = min(res.fisher_criteria.size, R2.size)
        J = res.fisher_criteria[:k]
        np.testing.assert_allclose(J, R2[:k] / (1 - R2[:k]), rtol=1e-6, atol=1e-9)


class TestDefinitionGreedy:
    def test_iris(self, iris):
        features, _, Y = iris
        for batched in (True, False):
            r = definition_greedy_select(features, Y, 3, batched=batched)
            assert r.indices == [2, 3, 1]
            assert r.criterion == pytest.approx(1.5531, abs=5e-5)
            assert r.method == "definition"

    def test_all_features(self, rng):
        X, labels = _grouped(rng, 20, 4, 3)
        r = definition_greedy_select(X, encode_response_multinomial(labels), 4)
        assert sorted(r.indices) == [0, 1, 2, 3]

    def test_bad_t(self, rng):
        X, labels = _grouped(rng, 20, 3, 2)
        with pytest.raises(ValueError):
            definition_greedy_select(X, encode_response_multinomial(labels), 4)

    def test_duplicate_flagged(self, rng):
        X, labels = _grouped(rng, 20, 3, 3)
        X = np.column_stack([X, X[:, 0]])
        r = definition_greedy_select(X, encode_response_multinomial(labels), 4)
        assert r.status == "under-selected" and 3 in r.dropped and len(r.steps) == 3

    @given(seeds)
    @settings(max_examples=30)
    def test_batched_matches_per_candidate(self, seed):
        rng = np.random.default_rng(seed)
        X, labels = _grouped(rng, 25, 6, 3)
        Y = encode_response_multinomial(labels)
        a = definition_greedy_select(X, Y, 3, batched=True)
        b = definition_greedy_select(X, Y, 3, batched=False)
        assert a.indices == b.indices
        np.testing.assert_allclose(a.gains, b.gains, atol=1e-9)

    def test_iris_blocks_match_ols(self, iris):
        from olsfs import select_categorical

        features, _, Y = iris
        blocks = feature_blocks(features, "mean-std-4")
        a = definition_greedy_select(blocks, Y, 3)
        b = select_categorical(blocks, Y, 3)
        assert a.indices == b.indices and a.status == b.status
        np.testing.assert_allclose(a.gains, b.gains, atol=1e-8)


class TestExhaustive:
    def test_iris(self, iris):
        features, _, Y = iris
        subset, value = exhaustive_select(features, Y, 3)
        assert subset == (1, 2, 3)
        assert value == pytest.approx(1.5531, abs=5e-5)

    def test_full_set_and_single(self, rng):
        X, labels = _grouped(rng, 20, 4, 3)
        Y = encode_response_multinomial(labels)
        assert exhaustive_select(X, Y, 4)[0] == (0, 1, 2, 3)
        assert exhaustive_select(X, Y, 1)[0] == (select_multinomial(X, Y, 1).indices[0],)

    def test_guard(self, rng):
        X, labels = _grouped(rng, 30, 25, 2)
        with pytest.raises(ValueError, match="exceeds the limit"):
            exhaustive_select(X, encode_response_multinomial(labels), 12, max_subsets=1000)

    @given(seeds, st.integers(1, 4))
    @settings(max_examples=30)
    def test_never_below_greedy(self, seed, t):
        rng = np.random.default_rng(seed)
        X, labels = _grouped(rng, 20, 6, 3, shift=0.3)
        Y = encode_response_multinomial(labels)
        _, best = exhaustive_select(X, Y, t)
        assert best >= select_multinomial(X, Y, t).criterion - 1e-10


class TestIntercept:
    def test_zero_mean_columns(self, rng):
        X = center_columns(rng.standard_normal((10, 2))).values
        y = rng.standard_normal(10) + 3
        chk = ols_intercept_check(X, y)
        assert chk.intercept == pytest.approx(y.mean())

    def test_constant_response(self, rng):
        chk = ols_intercept_check(rng.standard_normal((10, 3)), np.full(10, 2.5))
        assert chk.intercept == pytest.approx(2.5)
        np.testing.assert_allclose(chk.coef, 0.0, atol=1e-12)

    def test_random(self, rng):
        X = rng.standard_normal((20, 4))
        chk = ols_intercept_check(X, X @ [1.0, 2.0, 0.0, -1.0] + 4 + rng.standard_normal(20))
        assert chk.max_discrepancy <= 1e-9

    def test_rank_deficient(self, rng):
        X = rng.standard_normal((10, 2))
        X = np.column_stack([X, X[:, 0]])
        y = rng.standard_normal(10)
        with pytest.raises(SingularMatrixError):
            ols_intercept_check(X, y)
        assert ols_intercept_check(X, y, pseudo=True).max_discrepancy <= 1e-9
