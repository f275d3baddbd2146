from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ALGORITHMS = ("SVM", "RF", "ET", "AB")


class TrainingError(RuntimeError):
    pass


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class ClassWeights:
    w0: float
    w1: float

    def __post_init__(self):
        for v in (self.w0, self.w1):
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"class weights must be finite and positive, got ({self.w0}, {self.w1})")

    def per_sample(self, y) -> np.ndarray:
        return np.where(np.asarray(y) == 1, self.w1, self.w0).astype(np.float64)

    @property
    def ratio(self) -> float:
        return self.w1 / self.w0


def compute_class_weights(labels, mode: str | float = "balanced") -> ClassWeights:
    """Balanced (inverse-frequency) weights ``N / (2 N_c)``, or ``(1, r)`` for a fixed ratio."""
    y = np.asarray(labels)
    n1 = int(np.sum(y == 1))
    n0 = int(np.sum(y == 0))
    if n1 == 0 or n0 == 0:
        raise TrainingError(f"both classes are required, got {n0} negatives and {n1} positives")
    if mode == "balanced":
        n = n0 + n1
        return ClassWeights(n / (2 * n0), n / (2 * n1))
    return ClassWeights(1.0, float(mode))


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for all four algorithms; only the relevant block is used."""

    algorithm: str = "RF"
    weights: str | float = "balanced"
    seed: int = 0
    # SVM
    C: float = 1.0
    gamma: float | None = None  # None -> 1 / (d * var(X)) after standardization
    standardize: bool = True
    svm_tol: float = 1e-3
    svm_max_iter: int | None = None
    # RF / ET
    n_trees: int = 100
    max_depth: int = 20
    min_samples_leaf: int = 2
    max_features: str | int = "sqrt"
    # AB
    n_rounds: int = 50
    weak_depth: int = 2
    workers: int = 1

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.weights != "balanced":
            try:
                r = float(self.weights)
            except (TypeError, ValueError):
                raise ValueError(f"weights must be 'balanced' or a positive ratio, got {self.weights!r}") from None
            if not r > 0:
                raise ValueError("weight ratio must be positive")
        positive = {
            "C": self.C, "svm_tol": self.svm_tol, "n_trees": self.n_trees, "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf, "n_rounds": self.n_rounds,
            "weak_depth": self.weak_depth, "workers": self.workers,
        }
        if self.gamma is not None:
            positive["gamma"] = self.gamma
        for name, value in positive.items():
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")

    def as_dict(self) -> dict:
        from dataclasses import asdict
        return asdict(self)


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    subjects: list[str] = field(default_factory=list)
    recordings: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y).astype(np.int8)
        if self.X.ndim != 2 or len(self.X) != len(self.y) or len(self.y) == 0:
            raise ValueError(f"need a non-empty N x d matrix with N labels, got {self.X.shape} and {self.y.shape}")
        if not np.all(np.isin(self.y, (0, 1))):
            raise ValueError("labels must be 0 or 1")
        if not np.all(np.isfinite(self.X)):
            raise ValueError("features contain non-finite values")


def check_training_data(X, y):
    data = Dataset(X, y)
    if data.y.min() == data.y.max():
        raise TrainingError("both classes must be present for training")
    return data.X, data.y


def check_dimension(X, d: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[-1] != d:
        raise DimensionError(f"model expects {d} features, got {X.shape[-1]}")
    return X


def labels_from_scores(scores: np.ndarray) -> np.ndarray:
    # ties go to the non-seizure class
    return (scores > 0).astype(np.int8)
