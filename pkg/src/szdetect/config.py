"""YAML run configuration.

Every section maps onto a dataclass; unknown keys anywhere are rejected so a
typo can never silently fall back to a default. ``configs/example.yaml``
documents each key.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import yaml

from .dwt import DwtConfig
from .evaluation.scenario import ScenarioConfig
from .models import TrainConfig
from .pipeline import PipelineConfig
from .windower import WindowConfig

CONFIG_NAME = "config.yaml"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CorpusSection:
    root: str = "data/chbmit"
    exclude: tuple[str, ...] = ()


@dataclass(frozen=True)
class FeatureSection:
    channels: tuple[str, ...] = ("temporal",)
    windows: tuple[int, ...] = (8,)
    stride_s: float | None = None
    wavelet: str = "db4"
    levels: int = 4
    extension: str = "symmetric"


@dataclass(frozen=True)
class ModelSection:
    algorithms: tuple[str, ...] = ("RF", "ET", "AB")
    weights: tuple = ("balanced",)
    C: float = 1.0
    gamma: float | None = None
    standardize: bool = True
    svm_tol: float = 1e-3
    svm_max_iter: int | None = None
    n_trees: int = 100
    max_depth: int = 20
    min_samples_leaf: int = 2
    max_features: str | int = "sqrt"
    n_rounds: int = 50
    weak_depth: int = 2


@dataclass(frozen=True)
class EvaluationSection:
    split: str = "subject-specific"
    smoothing: tuple[bool, ...] = (True,)
    smooth_k: int = 3


@dataclass(frozen=True)
class RunConfig:
    corpus: CorpusSection = field(default_factory=CorpusSection)
    features: FeatureSection = field(default_factory=FeatureSection)
    model: ModelSection = field(default_factory=ModelSection)
    evaluation: EvaluationSection = field(default_factory=EvaluationSection)
    seed: int = 0
    workers: int | None = None  # None -> available hardware parallelism
    output: str = "runs/latest"

    # -- derived configurations ------------------------------------------------

    def dwt(self) -> DwtConfig:
        f = self.features
        return DwtConfig(levels=f.levels, wavelet=f.wavelet, mode=f.extension)

    def train_config(self, algorithm: str | None = None, weights=None) -> TrainConfig:
        m = asdict(self.model)
        m.pop("algorithms")
        m.pop("weights")
        return TrainConfig(
            algorithm=algorithm or self.model.algorithms[0],
            weights=weights if weights is not None else self.model.weights[0],
            seed=self.seed,
            **m,
        )

    def scenario(self) -> ScenarioConfig:
        return ScenarioConfig(
            split=self.evaluation.split,
            channel_sets=self.features.channels,
            windows=self.features.windows,
            stride_s=self.features.stride_s,
            dwt=self.dwt(),
            algorithms=self.model.algorithms,
            weights=self.model.weights,
            smoothing=self.evaluation.smoothing,
            smooth_k=self.evaluation.smooth_k,
            seed=self.seed,
            train=self.train_config(),
            workers=self.resolved_workers(),
        )

    def pipeline(self, channels: tuple[str, ...], window_s: int | None = None) -> PipelineConfig:
        return PipelineConfig(
            channels=tuple(channels),
            window=WindowConfig(window_s or self.features.windows[0], self.features.stride_s),
            dwt=self.dwt(),
            smooth_k=self.evaluation.smooth_k,
        )

    def resolved_workers(self) -> int:
        return self.workers if self.workers is not None else (os.cpu_count() or 1)

    def with_overrides(self, **kw) -> RunConfig:
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    # -- (de)serialization -----------------------------------------------------

    def as_dict(self) -> dict:
        return _plain(asdict(self))

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.as_dict(), sort_keys=False, default_flow_style=False)

    def validate(self) -> RunConfig:
        try:
            self.scenario()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.workers is not None and self.workers < 1:
            raise ConfigError("workers must be >= 1")
        return self


_SECTIONS = {
    "corpus": CorpusSection,
    "features": FeatureSection,
    "model": ModelSection,
    "evaluation": EvaluationSection,
}
_TUPLE_KEYS = {"exclude", "channels", "windows", "algorithms", "weights", "smoothing"}


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _section(cls, data, where: str):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"section {where!r} must be a mapping")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where!r}: {', '.join(unknown)}; allowed: {', '.join(sorted(known))}")
    kw = {}
    for k, v in data.items():
        if k in _TUPLE_KEYS:
            v = tuple(v) if isinstance(v, (list, tuple)) else (v,)
        kw[k] = v
    return cls(**kw)


def config_from_dict(data: dict | None) -> RunConfig:
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping at the top level")
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}; allowed: {', '.join(sorted(known))}")
    try:
        kw = {name: _section(cls, data.get(name), name) for name, cls in _SECTIONS.items()}
        for k in ("seed", "workers", "output"):
            if k in data:
                kw[k] = data[k]
        cfg = RunConfig(**kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return cfg.validate()


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig().validate()
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(data)


def write_resolved(cfg: RunConfig, directory: str | Path, name: str = CONFIG_NAME) -> Path:
    path = Path(directory) / name
    path.write_text(cfg.to_yaml(), encoding="utf-8")
    return path
