import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from olsfs import (
    FeatureMatrix,
    cca_eigen,
    definition_greedy_select,
    encode_response_binomial,
    encode_response_multinomial,
    feature_blocks,
    select_binomial,
    select_categorical,
    select_multinomial,
)
from olsfs.dataset import FeatureBlock
from olsfs.linalg import center_columns, gram_schmidt_self, orthogonalize_against
from olsfs.selector import COMPLETE, UNDER_SELECTED, pick_best
from olsfs.socc import socc_matrix

seeds = st.integers(0, 2 ** 32 - 1)


def _instance(seed, N=40, n=8, c=3):
    rng = np.random.default_rng(seed)
    labels = rng.permutation(np.concatenate([np.arange(c).repeat(2), rng.integers(0, c, N - 2 * c)]))
    X = rng.standard_normal((N, n)) * np.exp(rng.normal(0, 1, n)) + rng.normal(0, 2, n)
    X[:, 1] += 0.6 * labels
    X[:, n - 1] -= 0.3 * (labels == 1)
    return X, labels, encode_response_multinomial(labels)


def _sum_r2(X, Y, cols):
    if not cols:
        return 0.0
    return float(cca_eigen(X[:, cols], Y).eigenvalues.sum())


def _gap(X, Y, t):
    # smallest margin between best and runner-up over the steps of the run
    V = gram_schmidt_self(center_columns(Y.matrix))
    Xc = center_columns(X).values
    chosen, worst = [], np.inf
    for _ in range(t):
        B = gram_schmidt_self(Xc[:, chosen])
        s = np.full(X.shape[1], -np.inf)
        for j in set(range(X.shape[1])) - set(chosen):
            w, _, dead = orthogonalize_against(Xc[:, j], B)
            s[j] = -np.inf if dead[0] else float(socc_matrix(w, V))
        top = np.sort(s)[::-1]
        worst = min(worst, top[0] - top[1])
        chosen.append(int(np.argmax(s)))
    return worst


class TestIris:
    def test_sequence_and_gains(self, iris):
        features, _, Y = iris
        r = select_multinomial(features, Y, 3)
        assert r.names == ["petal_length", "petal_width", "sepal_width"]
        np.testing.assert_allclose(r.gains, [0.9779, 0.4644, 0.1108], atol=5e-5)
        assert r.criterion == pytest.approx(1.5531, abs=5e-5)
        assert r.status == COMPLETE and r.method == "ols"

    def test_every_candidate_score(self, iris):
        # all printed candidate values of the three steps, in candidate order
        features, _, Y = iris
        V = gram_schmidt_self(center_columns(Y.matrix))
        Xc = center_columns(features.values).values
        expected = {(): [0.7628, 0.2264, 0.9779, 0.9604],
                    (2,): [0.4458, 0.0841, 0.4644],
                    (2, 3): [0.0382, 0.1108]}
        for chosen, values in expected.items():
            B = gram_schmidt_self(Xc[:, list(chosen)])
            rest = [j for j in range(4) if j not in chosen]
            got = [float(socc_matrix(orthogonalize_against(Xc[:, j], B)[0], V)) for j in rest]
            np.testing.assert_allclose(got, values, atol=5e-5)

    def test_report_dict(self, iris):
        features, _, Y = iris
        d = select_multinomial(features, Y, 2).to_dict()
        assert set(d) == {"method", "steps", "dropped", "elapsed_ms"}
        assert d["steps"][0] == {"index": 2, "name": "petal_length",
                                 "gain": pytest.approx(0.97791, abs=1e-5),
                                 "cumulative": pytest.approx(0.97791, abs=1e-5)}
        assert len(d["elapsed_ms"]["steps"]) == 2
        assert d["elapsed_ms"]["total"] >= sum(d["elapsed_ms"]["steps"]) >= 0


class TestContracts:
    def test_t_validation(self, iris):
        features, _, Y = iris
        for bad in (0, 5):
            with pytest.raises(ValueError):
                select_multinomial(features, Y, bad)
        with pytest.raises(TypeError):
            select_multinomial(features, Y, True)
        with pytest.raises(TypeError):
            select_multinomial(features, Y, 2.0)

    def test_binomial_needs_single_column(self, iris):
        features, _, Y = iris
        with pytest.raises(ValueError, match="single response column"):
            select_binomial(features, Y, 1)

    def test_row_mismatch(self, iris):
        features, _, _ = iris
        with pytest.raises(ValueError, match="rows"):
            select_binomial(features, np.zeros(5), 1)

    def test_constant_response(self, rng):
        with pytest.raises(ValueError, match="constant"):
            select_binomial(rng.standard_normal((6, 2)), np.ones(6), 1)

    def test_all_features_selected(self, rng):
        X, _, Y = _instance(1, n=3)
        r = select_multinomial(X, Y, 3)
        assert sorted(r.indices) == [0, 1, 2]
        assert np.all(np.diff([s.cumulative for s in r.steps]) >= 0)

    def test_duplicate_never_chosen_after_original(self, rng):
        X, _, Y = _instance(2, n=4)
        first = select_multinomial(X, Y, 1).indices[0]
        # the copy sits before the original, the original then loses the tie
        X = np.column_stack([X[:, first], X])
        r = select_multinomial(X, Y, 4)
        assert r.indices[0] == 0
        assert first + 1 not in r.indices and r.dropped == [first + 1]

    def test_under_selection(self, rng):
        X = rng.standard_normal((10, 2))
        X = np.column_stack([X, X.sum(axis=1)])
        y = (rng.uniform(size=10) < 0.5).astype(float)
        y[:2] = [0, 1]
        r = select_binomial(X, y, 3)
        assert r.status == UNDER_SELECTED
        assert len(r.steps) == 2 and r.requested == 3 and r.dropped

    def test_constant_feature_flagged(self, rng):
        X, _, Y = _instance(3, n=3)
        X[:, 0] = 7.0
        r = select_multinomial(X, Y, 3)
        assert r.status == UNDER_SELECTED and r.dropped == [0]

    def test_pick_best_ties(self):
        assert pick_best([0.5, 0.7, 0.7]) == 1
        assert pick_best([0.7 - 1e-15, 0.7]) == 0
        assert pick_best([-np.inf, 0.1]) == 1

    def test_accepts_feature_matrix_names(self, rng):
        X, _, Y = _instance(4, n=3)
        fm = FeatureMatrix.from_array(X, names=["a", "b", "c"])
        assert select_multinomial(fm, Y, 1).names == ["b"]


class TestProperties:
    @given(seeds)
    @settings(max_examples=40, deadline=None)
    def test_gains_match_oracle_differences(self, seed):
        X, _, Y = _instance(seed)
        r = select_multinomial(X, Y, 4)
        for k, step in enumerate(r.steps):
            before = _sum_r2(X, Y, r.indices[:k])
            after = _sum_r2(X, Y, r.indices[:k + 1])
            assert step.gain == pytest.approx(after - before, abs=1e-8)
            assert step.gain >= 0
        cum = np.cumsum(r.gains)
        np.testing.assert_allclose([s.cumulative for s in r.steps], cum, atol=1e-10)
        assert r.criterion <= min(4, Y.m) + 1e-9

    @given(seeds)
    @settings(max_examples=40, deadline=None)
    def test_recompute_matches_incremental(self, seed):
        X, _, Y = _instance(seed)
        a = select_multinomial(X, Y, 6)
        b = select_multinomial(X, Y, 6, recompute=True)
        assert a.indices == b.indices
        np.testing.assert_allclose(a.gains, b.gains, atol=1e-10)

    @given(seeds, st.data())
    @settings(max_examples=40, deadline=None)
    def test_affine_invariance(self, seed, data):
        X, _, Y = _instance(seed)
        assume(_gap(X, Y, 4) > 1e-8)
        a = np.array(data.draw(st.lists(st.floats(0.01, 100), min_size=8, max_size=8)))
        sign = np.array(data.draw(st.lists(st.sampled_from([-1.0, 1.0]), min_size=8, max_size=8)))
        b = np.array(data.draw(st.lists(st.floats(-100, 100), min_size=8, max_size=8)))
        moved = X * (a * sign) + b
        assert select_multinomial(X, Y, 4).indices == select_multinomial(moved, Y, 4).indices

    @given(seeds, st.floats(-50, 50), st.floats(0.5, 20))
    @settings(max_examples=40, deadline=None)
    def test_binomial_label_values_irrelevant(self, seed, lo, delta):
        X, labels, _ = _instance(seed, c=2)
        y01 = encode_response_binomial(labels)
        y = np.where(y01.matrix[:, 0] == 1, lo + delta, lo)
        a = select_binomial(X, y01, 4)
        b = select_binomial(X, y, 4)
        assert a.indices == b.indices
        np.testing.assert_allclose(a.gains, b.gains, atol=1e-10)

    @given(seeds, st.permutations(range(8)))
    @settings(max_examples=40, deadline=None)
    def test_permutation_equivariance(self, seed, perm):
        X, _, Y = _instance(seed)
        assume(_gap(X, Y, 4) > 1e-8)
        perm = np.array(perm)
        base = select_multinomial(X, Y, 4).indices
        moved = select_multinomial(X[:, perm], Y, 4).indices
        assert [int(perm[j]) for j in moved] == base

    @given(seeds)
    @settings(max_examples=20, deadline=None)
    def test_binomial_matches_multinomial_for_two_classes(self, seed):
        X, labels, _ = _instance(seed, c=2)
        Y = encode_response_multinomial(labels)
        assert select_binomial(X, Y, 3).indices == select_multinomial(X, Y, 3).indices

    @given(seeds)
    @settings(max_examples=40, deadline=None)
    def test_mutual_oracle(self, seed):
        X, _, Y = _instance(seed)
        assume(_gap(X, Y, 4) > 1e-8)
        assert select_multinomial(X, Y, 4).indices == definition_greedy_select(X, Y, 4).indices


class TestCategorical:
    def test_width_one_blocks_match_columns(self):
        X, _, Y = _instance(5)
        blocks = [FeatureBlock(X[:, [j]], j) for j in range(X.shape[1])]
        a = select_categorical(blocks, Y, 4)
        b = select_multinomial(X, Y, 4)
        assert a.indices == b.indices
        np.testing.assert_allclose(a.gains, b.gains, atol=1e-10)
        assert a.method == "olsd"

    def test_duplicate_block_dropped(self, iris):
        features, _, Y = iris
        block = feature_blocks(features, "mean-std-3")[2]
        copy = FeatureBlock(block.columns.copy(), 1)
        r = select_categorical([block, copy], Y, 2)
        assert r.indices == [0]
        assert r.status == UNDER_SELECTED and r.dropped == [1]

    def test_block_score_is_canonical_sum(self):
        rng = np.random.default_rng(8)
        labels = rng.integers(0, 3, 30)
        Y = encode_response_multinomial(labels)
        codes = (labels + rng.integers(0, 2, 30)) % 4
        block = FeatureBlock((codes[:, None] == np.arange(3)).astype(float), 0)
        noise = FeatureBlock(rng.standard_normal((30, 1)), 1)
        r = select_categorical([block, noise], Y, 1)
        assert r.indices == [0]
        assert r.gains[0] == pytest.approx(cca_eigen(block.columns, Y).eigenvalues.sum(), abs=1e-10)

    def test_iris_discretized_matches_definition(self, iris):
        features, _, Y = iris
        blocks = feature_blocks(features, "mean-std-4")
        a = select_categorical(blocks, Y, 3)
        b = definition_greedy_select(blocks, Y, 3)
        assert a.indices == b.indices
        np.testing.assert_allclose(a.gains, b.gains, atol=1e-8)

    @given(seeds)
    @settings(max_examples=25, deadline=None)
    def test_random_blocks_match_definition(self, seed):
        X, _, Y = _instance(seed, N=60, n=5)
        blocks = feature_blocks(FeatureMatrix.from_array(X), "mean-std-4")
        a = select_categorical(blocks, Y, 3)
        b = definition_greedy_select(blocks, Y, 3)
        assert a.indices == b.indices
        np.testing.assert_allclose(a.gains, b.gains, atol=1e-8)

    @given(seeds)
    @settings(max_examples=20, deadline=None)
    def test_recompute_matches(self, seed):
        X, _, Y = _instance(seed, N=60, n=5)
        blocks = feature_blocks(FeatureMatrix.from_array(X), "mean-std-3")
        a = select_categorical(blocks, Y, 3)
        b = select_categorical(blocks, Y, 3, recompute=True)
        assert a.indices == b.indices
        np.testing.assert_allclose(a.gains, b.gains, atol=1e-10)
