"""Versioned JSON model container.

Layout (UTF-8 JSON object)::

    {"format": "szdetect-model", "version": 1, "algorithm": "RF",
     "config": {...TrainConfig...}, "metadata": {...}, "payload": {...}}

Floats are written with ``repr`` precision, so decoding reproduces every
parameter bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .adaboost import AdaBoostModel
from .svm import SvmModel
from .trees import Tree, TreeEnsembleModel

FORMAT = "szdetect-model"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    pass


class ModelVersionError(ModelFormatError):
    def __init__(self, found, supported=FORMAT_VERSION):
        super().__init__(f"model file has format version {found}; this build reads version {supported}")
        self.found = found
        self.supported = supported


def _tree_to_dict(t: Tree) -> dict:
    return {
        "feature": t.feature.tolist(),
        "threshold": t.threshold.tolist(),
        "left": t.left.tolist(),
        "right": t.right.tolist(),
        "value": t.value.tolist(),
    }


def _tree_from_dict(d: dict) -> Tree:
    return Tree(
        feature=np.asarray(d["feature"], dtype=np.int64),
        threshold=np.asarray(d["threshold"], dtype=np.float64),
        left=np.asarray(d["left"], dtype=np.int64),
        right=np.asarray(d["right"], dtype=np.int64),
        value=np.asarray(d["value"], dtype=np.float64).reshape(-1, 2),
    )


def _payload(model) -> dict:
    if isinstance(model, SvmModel):
        return {
            "support_vectors": model.support_vectors.tolist(),
            "dual_coef": model.dual_coef.tolist(),
            "bias": model.bias,
            "gamma": model.gamma,
            "mean": None if model.mean is None else model.mean.tolist(),
            "scale": None if model.scale is None else model.scale.tolist(),
        }
    if isinstance(model, TreeEnsembleModel):
        return {
            "mode": model.mode,
            "n_features": model.n_features,
            "tree_weights": model.tree_weights.tolist(),
            "trees": [_tree_to_dict(t) for t in model.trees],
        }
    if isinstance(model, AdaBoostModel):
        return {
            "n_features": model.n_features,
            "alphas": model.alphas.tolist(),
            "learners": [_tree_to_dict(t) for t in model.learners],
        }
    raise TypeError(f"cannot serialize {type(model).__name__}")


def serialize_model(model, config: dict | None = None, metadata: dict | None = None) -> bytes:
    doc = {
        "format": FORMAT,
        "version": FORMAT_VERSION,
        "algorithm": model.algorithm,
        "config": config or {},
        "metadata": metadata or {},
        "payload": _payload(model),
    }
    return json.dumps(doc, sort_keys=True, allow_nan=False).encode("utf-8")


def load_document(raw: bytes) -> dict:
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"corrupt model payload: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise ModelFormatError("corrupt model payload: not a szdetect model container")
    if doc.get("version") != FORMAT_VERSION:
        raise ModelVersionError(doc.get("version"))
    return doc


def deserialize_model(raw: bytes):
    doc = load_document(raw)
    p = doc.get("payload")
    try:
        algo = doc["algorithm"]
        if algo == "SVM":
            return SvmModel(
                support_vectors=np.asarray(p["support_vectors"], dtype=np.float64),
                dual_coef=np.asarray(p["dual_coef"], dtype=np.float64),
                bias=float(p["bias"]),
                gamma=float(p["gamma"]),
                mean=None if p["mean"] is None else np.asarray(p["mean"], dtype=np.float64),
                scale=None if p["scale"] is None else np.asarray(p["scale"], dtype=np.float64),
            )
        if algo in ("RF", "ET"):
            return TreeEnsembleModel(
                trees=[_tree_from_dict(t) for t in p["trees"]],
                mode=p["mode"],
                n_features=int(p["n_features"]),
                tree_weights=np.asarray(p["tree_weights"], dtype=np.float64),
            )
        if algo == "AB":
            return AdaBoostModel(
                learners=[_tree_from_dict(t) for t in p["learners"]],
                alphas=np.asarray(p["alphas"], dtype=np.float64),
                n_features=int(p["n_features"]),
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"corrupt model payload: {exc!r}") from None
    raise ModelFormatError(f"unknown algorithm tag {doc.get('algorithm')!r}")


def save_model(path, model, config: dict | None = None, metadata: dict | None = None) -> None:
    Path(path).write_bytes(serialize_model(model, config, metadata))


def load_model(path):
    raw = Path(path).read_bytes()
    return deserialize_model(raw), load_document(raw)
