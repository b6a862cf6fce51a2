import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import sparse

from adhoc_rae import corpus, forest
from adhoc_rae.errors import DegenerateLabelsError, ModelLoadError


def gini(labels, K):
    n = len(labels)
    return 1.0 - sum((labels.count(k) / n) ** 2 for k in range(K))


def exhaustive_stump(X, y, K):
    """Try every feature and every midpoint; plain Python arithmetic."""
    n, d = len(X), len(X[0])
    parent = gini(y, K)
    best = None
    for f in range(d):
        vals = sorted(set(row[f] for row in X))
        for lo, hi in zip(vals, vals[1:]):
            thr = (lo + hi) / 2
            left = [y[i] for i in range(n) if X[i][f] <= thr]
            right = [y[i] for i in range(n) if X[i][f] > thr]
            gain = parent - (len(left) * gini(left, K) + len(right) * gini(right, K)) / n
            if best is None or gain > best[2] + 1e-12:
                best = (f, thr, gain)
    if best is None or best[2] <= 1e-12:
        return None
    return best


def random_instance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 51))
    d = int(rng.integers(1, 21))
    K = int(rng.integers(2, 4))
    if seed % 2:
        X = rng.integers(0, 4, size=(n, d)).astype(float)  # many ties
    else:
        X = np.round(rng.normal(size=(n, d)), 3)
    y = rng.integers(0, K, size=n)
    y[:K] = np.arange(K)
    return X, y, K


# -- impurity and split search ------------------------------------------------------------


def test_gini_examples():
    assert forest.gini_impurity([5, 5]) == pytest.approx(0.5, abs=1e-15)
    assert forest.gini_impurity([3, 1]) == pytest.approx(0.375, abs=1e-15)
    assert forest.gini_impurity([4, 0]) == 0.0
    with pytest.raises(ValueError):
        forest.gini_impurity([0, 0])


@given(st.lists(st.integers(0, 50), min_size=2, max_size=5).filter(lambda c: sum(c) > 0))
def test_gini_bounds(counts):
    g = forest.gini_impurity(counts)
    assert -1e-15 <= g <= 1 - 1 / len(counts) + 1e-15


def test_best_split_simple():
    X = np.array([[0.0, 1.0], [0.0, 2.0], [1.0, 3.0], [1.0, 4.0]])
    assert forest.best_split(X, [0, 0, 1, 1], [0, 1]) == (0, 0.5, 0.5)
    assert forest.best_split(X, [0, 0, 1, 1], [1]) == (1, 2.5, 0.5)
    assert forest.best_split(X, [0, 0, 0, 0], [0, 1], n_classes=2) is None


@pytest.mark.parametrize("seed", range(20))
def test_best_split_matches_exhaustive_search(seed):
    X, y, K = random_instance(seed)
    got = forest.best_split(X, y, range(X.shape[1]), K)
    want = exhaustive_stump(X.tolist(), y.tolist(), K)
    if want is None:
        assert got is None
    else:
        assert got[:2] == want[:2]
        assert abs(got[2] - want[2]) <= 1e-12


@pytest.mark.parametrize("seed", range(20))
def test_depth_one_tree_is_the_exhaustive_stump(seed):
    X, y, K = random_instance(seed)
    cfg = forest.ForestConfig(n_trees=1, mtry=X.shape[1], max_depth=1, bootstrap=False, seed=seed)
    tree = forest.train_forest(X, y, cfg, n_classes=K).trees[0]
    want = exhaustive_stump(X.tolist(), y.tolist(), K)
    if want is None:
        assert tree.n_nodes == 1
        return
    f, thr, _ = want
    assert (tree.feature[0], tree.threshold[0]) == (f, thr)
    left = [int(c) for c in np.bincount(y[X[:, f] <= thr], minlength=K)]
    right = [int(c) for c in np.bincount(y[X[:, f] > thr], minlength=K)]
    assert list(tree.counts[tree.left[0]]) == left
    assert list(tree.counts[tree.right[0]]) == right


# -- training ---------------------------------------------------------------------------------


def separable(n=20, d=6, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.random((n, d))
    y = (X[:, 2] > 0.5).astype(int)
    y[0], y[1] = 0, 1
    X[0, 2], X[1, 2] = 0.1, 0.9
    return X, y


def test_separable_training_accuracy():
    X, y = separable()
    model = forest.train_forest(X, y, forest.ForestConfig(n_trees=25, seed=1))
    assert forest.predict_many(model, sparse.csr_matrix(X)) == y.tolist()


def test_unpruned_tree_fits_training_set_without_bootstrap():
    rng = np.random.default_rng(3)
    X = rng.random((40, 5))
    y = rng.integers(0, 2, 40)
    cfg = forest.ForestConfig(n_trees=1, mtry=5, bootstrap=False)
    tree = forest.train_forest(X, y, cfg).trees[0]
    for row, label in zip(X, y):
        assert tree.vote(dict(enumerate(row))) == label
    # every leaf is pure
    assert all(c is None or np.count_nonzero(c) == 1 for c in tree.counts)


def test_training_is_deterministic_and_seed_sensitive():
    X, y = separable(60, 10, seed=4)
    a = forest.train_forest(X, y, forest.ForestConfig(n_trees=8, seed=7))
    b = forest.train_forest(X, y, forest.ForestConfig(n_trees=8, seed=7))
    c = forest.train_forest(X, y, forest.ForestConfig(n_trees=8, seed=8))
    assert a.trees == b.trees
    assert a.trees != c.trees


def test_dense_and_sparse_paths_agree(monkeypatch):
    X, y = separable(60, 10, seed=5)
    X[X < 0.5] = 0.0
    cfg = forest.ForestConfig(n_trees=6, seed=2)
    dense = forest.train_forest(X, y, cfg)
    monkeypatch.setattr(forest, "DENSE_LIMIT", 0)
    sparse_model = forest.train_forest(sparse.csr_matrix(X), y, cfg)
    assert dense.trees == sparse_model.trees


def test_parallel_matches_serial():
    X, y = separable(30, 4, seed=6)
    cfg = forest.ForestConfig(n_trees=4, seed=3)
    assert forest.train_forest(X, y, cfg, n_jobs=2).trees == forest.train_forest(X, y, cfg).trees


def test_degenerate_labels():
    with pytest.raises(DegenerateLabelsError):
        forest.train_forest(np.ones((3, 2)), [0, 0, 0])


def test_config_validation():
    with pytest.raises(ValueError):
        forest.ForestConfig(n_trees=0)
    with pytest.raises(ValueError):
        forest.ForestConfig(mtry=5).resolved_mtry(3)
    assert forest.ForestConfig().resolved_mtry(10) == 4


def test_min_leaf_and_max_depth_respected():
    rng = np.random.default_rng(0)
    X = rng.random((50, 3))
    y = rng.integers(0, 2, 50)
    model = forest.train_forest(X, y, forest.ForestConfig(n_trees=3, min_leaf=5, max_depth=3))
    for t in model.trees:
        for c in t.counts:
            if c is not None:
                assert sum(c) >= 5

        def depth(i):
            return 0 if t.feature[i] < 0 else 1 + max(depth(t.left[i]), depth(t.right[i]))

        assert depth(0) <= 3


# -- prediction ----------------------------------------------------------------------------------


def stump(feature, thr, left_counts, right_counts):
    return forest.Tree((feature, -1, -1), (thr, 0.0, 0.0), (1, -1, -1), (2, -1, -1),
                       (None, left_counts, right_counts))


def test_vote_fractions_and_tie_break():
    trees = (stump(0, 0.5, (1, 0), (0, 1)), stump(0, 0.5, (1, 0), (0, 1)), stump(1, 0.5, (0, 1), (1, 0)))
    model = forest.ForestModel(trees, 2, forest.ForestConfig(n_trees=3), 2)
    assert model.trees[0].vote({0: 0.2}) == 0
    cls, frac = forest.predict_forest(model, {0: 0.1})
    assert cls == 0 and frac == pytest.approx((2 / 3, 1 / 3))
    tie = forest.ForestModel(trees[1:], 2, forest.ForestConfig(n_trees=2), 2)
    assert forest.predict_forest(tie, {0: 0.1, 1: 0.1}) == (0, (0.5, 0.5))


def test_empty_row_follows_zero_branch():
    model = forest.ForestModel((stump(0, 0.5, (0, 1), (1, 0)),), 2, forest.ForestConfig(n_trees=1), 1)
    assert forest.predict_forest(model, {}) == (1, (0.0, 1.0))
    assert forest.predict_forest(model, np.zeros(1))[0] == 1


def test_trained_on_document_term_matrix_keeps_names():
    docs = [["good", "news"], ["bad", "news"]] * 5
    vocab = corpus.build_vocabulary(docs, 1)
    dtm = corpus.tfidf_transform(corpus.count_matrix(docs, vocab))
    model = forest.train_forest(dtm, [0, 1] * 5, forest.ForestConfig(n_trees=5))
    assert model.feature_names == ("bad", "good", "news")
    assert forest.predict_many(model, dtm) == [0, 1] * 5


# -- persistence -----------------------------------------------------------------------------------


def test_save_load_roundtrip(tmp_path):
    X, y = separable(40, 5, seed=9)
    model = forest.train_forest(X, y, forest.ForestConfig(n_trees=5, seed=4))
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    forest.save_forest(model, p1)
    loaded = forest.load_forest(p1)
    assert loaded == model
    forest.save_forest(loaded, p2)
    assert p1.read_bytes() == p2.read_bytes()
    for row in X:
        assert forest.predict_forest(loaded, row) == forest.predict_forest(model, row)


def test_load_errors(tmp_path):
    X, y = separable()
    model = forest.train_forest(X, y, forest.ForestConfig(n_trees=2))
    doc = model.to_dict()
    p = tmp_path / "m.json"
    p.write_text(json.dumps({**doc, "version": 99}))
    with pytest.raises(ModelLoadError, match="version"):
        forest.load_forest(p)
    p.write_text(json.dumps(doc)[:50])
    with pytest.raises(ModelLoadError):
        forest.load_forest(p)
    p.write_text(json.dumps({**doc, "format": "other"}))
    with pytest.raises(ModelLoadError):
        forest.load_forest(p)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_vote_fractions_sum_to_one(seed):
    rng = np.random.default_rng(seed)
    X = rng.random((15, 3))
    y = rng.integers(0, 3, 15)
    y[:3] = [0, 1, 2]
    model = forest.train_forest(X, y, forest.ForestConfig(n_trees=5, seed=seed))
    cls, frac = forest.predict_forest(model, X[0])
    assert sum(frac) == pytest.approx(1.0)
    assert frac[cls] == max(frac)
