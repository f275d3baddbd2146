"""Discrete two-class AdaBoost over shallow weighted-Gini trees."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .base import ClassWeights, TrainConfig, TrainingError, check_dimension, check_training_data, labels_from_scores
from .trees import StackedTrees, Tree, build_tree

EPS_FLOOR = 1e-10


def learner_weight(error: float) -> float:
    """``1/2 ln((1 - e) / e)`` with ``e`` floored at 1e-10."""
    e = max(error, EPS_FLOOR)
    return 0.5 * math.log((1.0 - e) / e)


@dataclass
class AdaBoostModel:
    learners: list[Tree]
    alphas: np.ndarray
    n_features: int
    history: dict = field(default_factory=dict, compare=False)

    algorithm = "AB"

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=np.float64)
        if len(self.learners) < 1 or len(self.alphas) != len(self.learners):
            raise ValueError("need at least one weak learner and one weight per learner")
        self._stacked = None

    @property
    def stacked(self) -> StackedTrees:
        if self._stacked is None:
            self._stacked = StackedTrees.from_trees(self.learners)
        return self._stacked

    def decision_function(self, X) -> np.ndarray:
        """``sum_m alpha_m * (2 h_m(x) - 1)``."""
        X = check_dimension(X, self.n_features)
        return ((2.0 * self.stacked.votes(X) - 1.0) * self.alphas).sum(axis=1)

    def predict(self, X):
        scores = self.decision_function(X)
        return labels_from_scores(scores), scores


def train_adaboost(X, y, cfg: TrainConfig = TrainConfig(algorithm="AB"), weights: ClassWeights | None = None) -> AdaBoostModel:
    X, y = check_training_data(X, y)
    weights = weights or ClassWeights(1.0, 1.0)
    w = weights.per_sample(y)
    w /= w.sum()
    y_pm = np.where(y == 1, 1.0, -1.0)
    rng = np.random.default_rng(cfg.seed)

    learners, alphas, errors, weight_sums = [], [], [], []
    for m in range(cfg.n_rounds):
        tree = build_tree(X, y, w, max_depth=cfg.weak_depth, min_samples_leaf=1, rng=rng)
        h = tree.vote(X)
        err = float(w[h != y].sum())
        if err >= 0.5:
            if m == 0:
                raise TrainingError(f"first weak learner has weighted error {err:.3f} >= 0.5")
            break
        alpha = learner_weight(err)
        learners.append(tree)
        alphas.append(alpha)
        errors.append(err)
        if err == 0:
            break
        w = w * np.exp(-alpha * y_pm * np.where(h == 1, 1.0, -1.0))
        w /= w.sum()
        weight_sums.append(float(w.sum()))
    return AdaBoostModel(
        learners=learners,
        alphas=np.array(alphas),
        n_features=X.shape[1],
        history={"errors": errors, "weight_sums": weight_sums},
    )
