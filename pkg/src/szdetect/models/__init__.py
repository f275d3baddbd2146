"""The four classifiers behind a shared ``train`` / ``predict`` surface."""

from __future__ import annotations

import numpy as np

from .adaboost import AdaBoostModel, learner_weight, train_adaboost
from .base import (
    ALGORITHMS,
    ClassWeights,
    Dataset,
    DimensionError,
    TrainConfig,
    TrainingError,
    compute_class_weights,
)
from .io import ModelFormatError, ModelVersionError, deserialize_model, load_model, save_model, serialize_model
from .svm import SvmConvergenceError, SvmModel, rbf_kernel, rbf_kernel_matrix, train_svm
from .trees import Tree, TreeEnsembleModel, build_tree, train_tree_ensemble, weighted_gini

__all__ = [
    "ALGORITHMS", "AdaBoostModel", "ClassWeights", "Dataset", "DimensionError", "ModelFormatError",
    "ModelVersionError", "SvmConvergenceError", "SvmModel", "TrainConfig", "TrainingError", "Tree",
    "TreeEnsembleModel", "build_tree", "compute_class_weights", "deserialize_model", "learner_weight",
    "load_model", "predict", "rbf_kernel", "rbf_kernel_matrix", "save_model", "serialize_model", "train",
    "train_adaboost", "train_svm", "train_tree_ensemble", "weighted_gini",
]


def train(X, y, cfg: TrainConfig):
    """Fit the configured algorithm with class weights derived from ``y``."""
    weights = compute_class_weights(y, cfg.weights)
    if cfg.algorithm == "SVM":
        return train_svm(X, y, cfg, weights)
    if cfg.algorithm in ("RF", "ET"):
        return train_tree_ensemble(X, y, cfg, weights)
    return train_adaboost(X, y, cfg, weights)


def predict(model, X) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(labels, scores)``; label is 1 iff score > 0."""
    return model.predict(X)
