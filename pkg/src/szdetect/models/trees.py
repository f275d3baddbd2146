"""Weighted-Gini decision trees, Random Forest and Extra Trees."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .base import ClassWeights, TrainConfig, check_dimension, check_training_data, labels_from_scores

LEAF = -1


def weighted_gini(w0: float, w1: float) -> float:
    total = w0 + w1
    if total <= 0:
        return 0.0
    p0, p1 = w0 / total, w1 / total
    return 1.0 - (p0 * p0 + p1 * p1)


@dataclass
class Tree:
    """Array-encoded binary tree; ``feature == -1`` marks a leaf.

    ``value[k]`` holds the weighted (class 0, class 1) counts routed to node k.
    Rows go left when ``x[feature] <= threshold``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        best, stack = 0, [(0, 0)]
        while stack:
            k, d = stack.pop()
            if self.feature[k] == LEAF:
                best = max(best, d)
            else:
                stack += [(self.left[k], d + 1), (self.right[k], d + 1)]
        return best

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        active = self.feature[node] != LEAF
        while active.any():
            r = rows[active]
            k = node[r]
            go_left = X[r, self.feature[k]] <= self.threshold[k]
            node[r] = np.where(go_left, self.left[k], self.right[k])
            active[r] = self.feature[node[r]] != LEAF
        return node

    def vote(self, X: np.ndarray) -> np.ndarray:
        v = self.value[self.apply(X)]
        return (v[:, 1] > v[:, 0]).astype(np.int8)


def _best_split_sorted(xs, w0s, w1s, min_leaf):
    """Best threshold per column for pre-sorted columns.

    ``xs``, ``w0s``, ``w1s`` are (n, k) arrays sorted along axis 0. Returns
    (decrease, position) per column; position p splits rows [0..p] | [p+1..].
    """
    n = xs.shape[0]
    c0 = np.cumsum(w0s, axis=0)
    c1 = np.cumsum(w1s, axis=0)
    t0, t1 = c0[-1], c1[-1]
    l0, l1 = c0[:-1], c1[:-1]
    r0, r1 = t0 - l0, t1 - l1
    lw, rw = l0 + l1, r0 + r1
    with np.errstate(invalid="ignore", divide="ignore"):
        # weight * gini = W - (w0^2 + w1^2) / W
        left_term = np.where(lw > 0, lw - (l0 * l0 + l1 * l1) / lw, 0.0)
        right_term = np.where(rw > 0, rw - (r0 * r0 + r1 * r1) / rw, 0.0)
    tw = t0 + t1
    parent = tw - (t0 * t0 + t1 * t1) / tw
    dec = parent - left_term - right_term
    valid = xs[:-1] < xs[1:]
    counts = np.arange(1, n)[:, None]
    valid &= (counts >= min_leaf) & (n - counts >= min_leaf)
    dec = np.where(valid, dec, -np.inf)
    pos = np.argmax(dec, axis=0)
    return dec[pos, np.arange(dec.shape[1])], pos


def build_tree(
    X: np.ndarray,
    y: np.ndarray,
    sample_weight: np.ndarray,
    *,
    max_depth: int,
    min_samples_leaf: int = 1,
    max_features: int | None = None,
    splitter: str = "best",
    rng: np.random.Generator | None = None,
) -> Tree:
    """Grow one tree. ``splitter="random"`` draws one uniform threshold per candidate feature."""
    n, d = X.shape
    k_feat = d if max_features is None else max(1, min(d, max_features))
    rng = rng if rng is not None else np.random.default_rng(0)
    is1 = y == 1
    w0_all = np.where(is1, 0.0, sample_weight)
    w1_all = np.where(is1, sample_weight, 0.0)

    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append((float(w0_all[idx].sum()), float(w1_all[idx].sum())))
        return len(feature) - 1

    stack = [(np.arange(n), 0, new_node(np.arange(n)))]
    while stack:
        idx, depth, node = stack.pop()
        v0, v1 = value[node]
        if depth >= max_depth or v0 <= 0 or v1 <= 0 or len(idx) < 2 * min_samples_leaf:
            continue
        split = _find_split(X, idx, w0_all, w1_all, k_feat, min_samples_leaf, splitter, rng)
        if split is None:
            continue
        f, thr = split
        mask = X[idx, f] <= thr
        li, ri = idx[mask], idx[~mask]
        feature[node] = f
        threshold[node] = thr
        ln, rn = new_node(li), new_node(ri)
        left[node], right[node] = ln, rn
        stack.append((ri, depth + 1, rn))
        stack.append((li, depth + 1, ln))

    return Tree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value, dtype=np.float64).reshape(-1, 2),
    )


def _find_split(X, idx, w0_all, w1_all, k_feat, min_leaf, splitter, rng):
    d = X.shape[1]
    Xn = X[idx]
    w0, w1 = w0_all[idx], w1_all[idx]
    # Draw features until k non-constant ones were examined (or features run out).
    order = rng.permutation(d) if k_feat < d else np.arange(d)
    lo, hi = Xn.min(axis=0), Xn.max(axis=0)
    nonconst = order[lo[order] < hi[order]]
    cand = nonconst[:k_feat]
    if len(cand) == 0:
        return None
    if splitter == "best":
        cols = Xn[:, cand]
        srt = np.argsort(cols, axis=0, kind="stable")
        xs = np.take_along_axis(cols, srt, axis=0)
        dec, pos = _best_split_sorted(xs, w0[srt], w1[srt], min_leaf)
        best = int(np.argmax(dec))
        if not np.isfinite(dec[best]):
            return None
        p = pos[best]
        a, b = xs[p, best], xs[p + 1, best]
        thr = a + (b - a) / 2
        if not a <= thr < b:
            thr = a
        return int(cand[best]), float(thr)

    thr = rng.uniform(lo[cand], hi[cand])
    best_dec, best = -np.inf, None
    tw0, tw1 = w0.sum(), w1.sum()
    tw = tw0 + tw1
    parent = tw - (tw0 * tw0 + tw1 * tw1) / tw
    for j, f in enumerate(cand):
        t = thr[j]
        if not t < hi[f]:
            continue
        m = Xn[:, f] <= t
        nl = int(m.sum())
        if nl < min_leaf or len(idx) - nl < min_leaf:
            continue
        l0, l1 = w0[m].sum(), w1[m].sum()
        r0, r1 = tw0 - l0, tw1 - l1
        lw, rw = l0 + l1, r0 + r1
        lt = lw - (l0 * l0 + l1 * l1) / lw if lw > 0 else 0.0
        rt = rw - (r0 * r0 + r1 * r1) / rw if rw > 0 else 0.0
        dec = parent - lt - rt
        if dec > best_dec:
            best_dec, best = dec, (int(f), float(t))
    return best


# ---------------------------------------------------------------------------
# Ensembles
# ---------------------------------------------------------------------------


@dataclass
class StackedTrees:
    """All trees of an ensemble packed into shared arrays for batch traversal."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_vote: np.ndarray
    roots: np.ndarray
    max_depth: int

    @classmethod
    def from_trees(cls, trees: list[Tree]) -> StackedTrees:
        offsets = np.cumsum([0] + [t.n_nodes for t in trees])
        shift = lambda a, o: np.where(a == LEAF, LEAF, a + o)  # noqa: E731
        return cls(
            feature=np.concatenate([t.feature for t in trees]),
            threshold=np.concatenate([t.threshold for t in trees]),
            left=np.concatenate([shift(t.left, o) for t, o in zip(trees, offsets)]),
            right=np.concatenate([shift(t.right, o) for t, o in zip(trees, offsets)]),
            leaf_vote=np.concatenate([(t.value[:, 1] > t.value[:, 0]) for t in trees]).astype(np.float64),
            roots=offsets[:-1].astype(np.int64),
            max_depth=max(t.depth() for t in trees),
        )

    def votes(self, X: np.ndarray) -> np.ndarray:
        """(n_samples, n_trees) matrix of 0/1 tree votes."""
        # leaves point to themselves so every row can step max_depth times
        feat = np.where(self.feature == LEAF, 0, self.feature)
        is_leaf = self.feature == LEAF
        own = np.arange(len(self.feature))
        left = np.where(is_leaf, own, self.left)
        right = np.where(is_leaf, own, self.right)
        node = np.broadcast_to(self.roots, (len(X), len(self.roots))).copy()
        rows = np.arange(len(X))[:, None]
        for _ in range(self.max_depth):
            go_left = X[rows, feat[node]] <= self.threshold[node]
            node = np.where(go_left, left[node], right[node])
        return self.leaf_vote[node]


@dataclass
class TreeEnsembleModel:
    trees: list[Tree]
    mode: str  # "RF" or "ET"
    n_features: int
    tree_weights: np.ndarray | None = None

    def __post_init__(self):
        if self.tree_weights is None:
            self.tree_weights = np.ones(len(self.trees))
        self._stacked = None

    @property
    def algorithm(self) -> str:
        return self.mode

    @property
    def stacked(self) -> StackedTrees:
        if self._stacked is None:
            self._stacked = StackedTrees.from_trees(self.trees)
        return self._stacked

    def decision_function(self, X) -> np.ndarray:
        """Weighted fraction of trees voting seizure, minus one half."""
        X = check_dimension(X, self.n_features)
        votes = self.stacked.votes(X)
        w = self.tree_weights
        return (votes * w).sum(axis=1) / w.sum() - 0.5

    def predict(self, X):
        scores = self.decision_function(X)
        return labels_from_scores(scores), scores


def n_split_features(max_features, d: int) -> int:
    if max_features == "sqrt":
        return max(1, int(math.sqrt(d)))
    if max_features in (None, "all"):
        return d
    return max(1, min(d, int(max_features)))


def tree_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def train_tree_ensemble(
    X, y, cfg: TrainConfig, weights: ClassWeights, mode: str | None = None
) -> TreeEnsembleModel:
    mode = mode or cfg.algorithm
    if mode not in ("RF", "ET"):
        raise ValueError(f"mode must be RF or ET, got {mode!r}")
    X, y = check_training_data(X, y)
    n, d = X.shape
    sw = weights.per_sample(y)
    k = n_split_features(cfg.max_features, d)

    def grow(i: int) -> Tree:
        rng = tree_rng(cfg.seed, i)
        if mode == "RF":
            idx = rng.integers(0, n, n)
            Xi, yi, wi = X[idx], y[idx], sw[idx]
        else:
            Xi, yi, wi = X, y, sw
        return build_tree(
            Xi, yi, wi,
            max_depth=cfg.max_depth,
            min_samples_leaf=cfg.min_samples_leaf,
            max_features=k,
            splitter="best" if mode == "RF" else "random",
            rng=rng,
        )

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            trees = list(pool.map(grow, range(cfg.n_trees)))
    else:
        trees = [grow(i) for i in range(cfg.n_trees)]
    return TreeEnsembleModel(trees=trees, mode=mode, n_features=d)
