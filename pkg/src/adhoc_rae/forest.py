"""Random forest of CART trees (Gini splits, bootstrap samples, a random
feature subset per node) over sparse document-term rows.

Randomness comes from numpy's PCG64 generator. Tree ``i`` draws from
``numpy.random.default_rng(seed ^ i)`` (PCG64 keyed through SeedSequence),
so every tree is reproducible on its own and training order does not matter.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import sparse

from .errors import DegenerateLabelsError, ModelLoadError

FORMAT = "adhoc_rae.forest"
VERSION = 1

# gains closer than this count as ties
_TIE_TOL = 1e-12
# training matrices up to this many cells are densified once; larger ones
# stay sparse and only each node's candidate columns are materialised
DENSE_LIMIT = 4_000_000


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 200
    mtry: int | None = None  # None -> ceil(sqrt(feature_dim))
    max_depth: int | None = None
    min_leaf: int = 1
    seed: int = 0
    bootstrap: bool = True  # off only for oracle tests

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.mtry is not None and self.mtry < 1:
            raise ValueError("mtry must be >= 1")

    def resolved_mtry(self, feature_dim: int) -> int:
        m = self.mtry if self.mtry is not None else math.ceil(math.sqrt(feature_dim))
        if not 1 <= m <= feature_dim:
            raise ValueError(f"mtry={m} outside [1, {feature_dim}]")
        return m


@dataclass(frozen=True)
class Tree:
    """Flat node arrays; node 0 is the root. Leaves have ``feature == -1``
    and carry class counts, internal nodes carry ``None`` there."""

    feature: tuple[int, ...]
    threshold: tuple[float, ...]
    left: tuple[int, ...]
    right: tuple[int, ...]
    counts: tuple[tuple[int, ...] | None, ...]

    def leaf_for(self, row: Mapping[int, float]) -> int:
        i = 0
        while self.feature[i] >= 0:
            i = self.left[i] if row.get(self.feature[i], 0.0) <= self.threshold[i] else self.right[i]
        return i

    def vote(self, row: Mapping[int, float]) -> int:
        return int(np.argmax(self.counts[self.leaf_for(row)]))

    @property
    def n_nodes(self) -> int:
        return len(self.feature)


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[Tree, ...]
    n_classes: int
    config: ForestConfig
    feature_dim: int
    feature_names: tuple[str, ...] | None = None

    def to_dict(self) -> dict:
        return {
            "format": FORMAT,
            "version": VERSION,
            "config": asdict(self.config),
            "n_classes": self.n_classes,
            "feature_dim": self.feature_dim,
            "feature_names": list(self.feature_names) if self.feature_names is not None else None,
            "trees": [
                {
                    "feature": list(t.feature),
                    "threshold": list(t.threshold),
                    "left": list(t.left),
                    "right": list(t.right),
                    "counts": [list(c) if c is not None else None for c in t.counts],
                }
                for t in self.trees
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ForestModel":
        if doc.get("format") != FORMAT:
            raise ModelLoadError(f"not a forest model (format={doc.get('format')!r})")
        if doc.get("version") != VERSION:
            raise ModelLoadError(f"forest model version mismatch: expected {VERSION}, found {doc.get('version')}")
        try:
            trees = tuple(
                Tree(
                    tuple(t["feature"]),
                    tuple(float(x) for x in t["threshold"]),
                    tuple(t["left"]),
                    tuple(t["right"]),
                    tuple(tuple(c) if c is not None else None for c in t["counts"]),
                )
                for t in doc["trees"]
            )
            names = doc.get("feature_names")
            return cls(
                trees,
                int(doc["n_classes"]),
                ForestConfig(**doc["config"]),
                int(doc["feature_dim"]),
                tuple(names) if names is not None else None,
            )
        except (KeyError, TypeError) as exc:
            raise ModelLoadError(f"malformed forest model: {exc}") from exc


def gini_impurity(class_counts: Sequence[int]) -> float:
    counts = np.asarray(class_counts, dtype=float)
    if np.any(counts < 0):
        raise ValueError("class counts must be nonnegative")
    total = counts.sum()
    if total <= 0:
        raise ValueError("gini impurity undefined for an empty node")
    p = counts / total
    return float(1.0 - np.dot(p, p))


def _scan(block: np.ndarray, y: np.ndarray, n_classes: int, min_leaf: int = 1):
    """Best split over the columns of a dense ``(n, m)`` block.

    Returns ``(column position, threshold, gain)`` or ``None``.
    """
    n, m = block.shape
    if n < 2 or m == 0:
        return None
    parent = gini_impurity(np.bincount(y, minlength=n_classes))
    order = np.argsort(block, axis=0, kind="stable")
    vals = np.take_along_axis(block, order, axis=0)
    onehot = np.eye(n_classes)[y[order]]  # (n, m, K)
    left = np.cumsum(onehot, axis=0)[:-1]
    total = left[-1] + onehot[-1]
    right = total[None] - left
    n_left = np.arange(1, n, dtype=float)[:, None]
    n_right = n - n_left
    g_left = 1.0 - np.sum(left * left, axis=2) / (n_left * n_left)
    g_right = 1.0 - np.sum(right * right, axis=2) / (n_right * n_right)
    gain = parent - (n_left * g_left + n_right * g_right) / n
    ok = vals[:-1] < vals[1:]
    if min_leaf > 1:
        ok &= (n_left >= min_leaf) & (n_right >= min_leaf)
    gain = np.where(ok, gain, -np.inf)
    best = gain.max()
    if not best > _TIE_TOL:
        return None
    pos, col = np.nonzero(gain >= best - _TIE_TOL)
    # lowest column first, then lowest threshold (lowest sorted position)
    k = np.lexsort((pos, col))[0]
    i, j = pos[k], col[k]
    lo, hi = vals[i, j], vals[i + 1, j]
    thr = (lo + hi) / 2.0
    if not lo <= thr < hi:
        thr = lo
    return int(j), float(thr), float(gain[i, j])


def best_split(
    X: np.ndarray,
    y: Sequence[int],
    candidate_features: Sequence[int],
    n_classes: int | None = None,
    min_leaf: int = 1,
):
    """Exhaustive midpoint search over ``candidate_features`` of a dense matrix.

    Returns ``(feature, threshold, gain)`` maximising the Gini decrease, or
    ``None`` when no split lowers impurity. Ties go to the lowest feature,
    then the lowest threshold.
    """
    y = np.asarray(y, dtype=np.int64)
    K = int(n_classes if n_classes is not None else y.max() + 1)
    feats = sorted(candidate_features)
    found = _scan(np.asarray(X, dtype=float)[:, feats], y, K, min_leaf)
    if found is None:
        return None
    j, thr, gain = found
    return feats[j], thr, gain


def _grow_tree(X, y: np.ndarray, n_classes: int, config: ForestConfig, index: int) -> Tree:
    n, d = X.shape
    dense = isinstance(X, np.ndarray)
    rng = np.random.default_rng(config.seed ^ index)
    mtry = config.resolved_mtry(d)
    sample = rng.integers(0, n, size=n) if config.bootstrap else np.arange(n)

    feature, threshold, left, right, counts = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(None)
        return len(feature) - 1

    root = new_node()
    stack = [(root, sample, 0)]
    while stack:
        node, idx, depth = stack.pop()
        ys = y[idx]
        cc = np.bincount(ys, minlength=n_classes)
        split = None
        if (
            np.count_nonzero(cc) > 1
            and (config.max_depth is None or depth < config.max_depth)
            and len(idx) >= 2 * config.min_leaf
        ):
            cand = np.sort(rng.choice(d, size=mtry, replace=False))
            block = X[np.ix_(idx, cand)] if dense else X[idx][:, cand].toarray()
            found = _scan(block, ys, n_classes, config.min_leaf)
            if found is not None:
                j, thr, _ = found
                split = (int(cand[j]), thr, block[:, j] <= thr)
        if split is None:
            counts[node] = tuple(int(c) for c in cc)
            continue
        f, thr, go_left = split
        feature[node], threshold[node] = f, thr
        lnode, rnode = new_node(), new_node()
        left[node], right[node] = lnode, rnode
        # right pushed first so the left subtree is numbered first
        stack.append((rnode, idx[~go_left], depth + 1))
        stack.append((lnode, idx[go_left], depth + 1))

    return Tree(tuple(feature), tuple(threshold), tuple(left), tuple(right), tuple(counts))


def _as_csr(X) -> sparse.csr_matrix:
    if hasattr(X, "to_csr"):
        return X.to_csr()
    if sparse.issparse(X):
        return sparse.csr_matrix(X, dtype=float)
    return sparse.csr_matrix(np.asarray(X, dtype=float))


def train_forest(
    dtm,
    labels: Sequence[int],
    config: ForestConfig = ForestConfig(),
    n_classes: int | None = None,
    n_jobs: int = 1,
) -> ForestModel:
    """Fit ``config.n_trees`` trees on a DocumentTermMatrix (or any 2-d
    sparse/dense matrix) with integer labels ``0..K-1``."""
    X = _as_csr(dtm)
    y = np.asarray(labels, dtype=np.int64)
    if X.shape[0] != len(y):
        raise ValueError(f"{X.shape[0]} rows but {len(y)} labels")
    if len(y) < 2 or len(np.unique(y)) < 2:
        raise DegenerateLabelsError("random forest needs >= 2 samples from >= 2 classes")
    K = int(n_classes if n_classes is not None else y.max() + 1)
    config.resolved_mtry(X.shape[1])
    if X.shape[0] * X.shape[1] <= DENSE_LIMIT:
        X = X.toarray()
    if n_jobs == 1:
        trees = [_grow_tree(X, y, K, config, i) for i in range(config.n_trees)]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            futures = [pool.submit(_grow_tree, X, y, K, config, i) for i in range(config.n_trees)]
            trees = [f.result() for f in futures]
    names = tuple(dtm.vocab.terms) if hasattr(dtm, "vocab") else None
    return ForestModel(tuple(trees), K, config, X.shape[1], names)


def _row_dict(row) -> dict[int, float]:
    if isinstance(row, Mapping):
        return dict(row)
    if sparse.issparse(row):
        r = row.tocsr()
        return dict(zip(r.indices.tolist(), r.data.tolist()))
    if isinstance(row, np.ndarray):
        nz = np.flatnonzero(row)
        return {int(j): float(row[j]) for j in nz}
    return dict(row)  # iterable of (column, weight) pairs


def predict_forest(model: ForestModel, row) -> tuple[int, tuple[float, ...]]:
    """Plurality vote of the trees; ties go to the lowest class index."""
    r = _row_dict(row)
    votes = np.zeros(model.n_classes, dtype=np.int64)
    for t in model.trees:
        votes[t.vote(r)] += 1
    fractions = tuple(float(v) / len(model.trees) for v in votes)
    return int(np.argmax(votes)), fractions


def predict_many(model: ForestModel, rows) -> list[int]:
    if hasattr(rows, "rows") and hasattr(rows, "vocab"):
        rows = rows.rows
    elif sparse.issparse(rows):
        rows = [rows.getrow(i) for i in range(rows.shape[0])]
    return [predict_forest(model, r)[0] for r in rows]


def save_forest(model: ForestModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), separators=(",", ":")) + "\n", encoding="utf-8")


def load_forest(path: str | Path) -> ForestModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelLoadError(f"cannot read forest model {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelLoadError(f"{path}: not a model document")
    return ForestModel.from_dict(doc)
