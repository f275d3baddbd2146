"""Window-by-window detection on one recording, batch or streaming."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .dwt import DwtConfig, extract_features, extract_features_batch
from .edf import TEMPORAL_CHANNELS, EegRecording, select_channels
from .evaluation.metrics import AlarmEvent, alarms_from_labels
from .postproc import MajoritySmoother, SmoothConfig, smooth_labels
from .windower import WindowConfig, segment_array


@dataclass(frozen=True)
class PipelineConfig:
    channels: tuple[str, ...] = TEMPORAL_CHANNELS
    window: WindowConfig = WindowConfig(8)
    dwt: DwtConfig = DwtConfig()
    smooth_k: int = 3

    def as_dict(self) -> dict:
        d = asdict(self)
        d["channels"] = list(self.channels)
        d["dwt"]["statistics"] = list(self.dwt.statistics)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> PipelineConfig:
        dwt = dict(d.get("dwt", {}))
        if "statistics" in dwt:
            dwt["statistics"] = tuple(dwt["statistics"])
        return cls(
            channels=tuple(d["channels"]),
            window=WindowConfig(**d.get("window", {})),
            dwt=DwtConfig(**dwt),
            smooth_k=int(d.get("smooth_k", 3)),
        )


@dataclass
class Detection:
    starts: np.ndarray
    raw: np.ndarray
    smoothed: np.ndarray
    scores: np.ndarray
    events: list[AlarmEvent] = field(default_factory=list)


def prepare(rec: EegRecording, cfg: PipelineConfig) -> EegRecording:
    return select_channels(rec, cfg.channels, allow_identical_duplicates=True)


def detect_offline(rec: EegRecording, model, cfg: PipelineConfig) -> Detection:
    rec = prepare(rec, cfg)
    windows, starts, _ = segment_array(rec, None, cfg.window)
    X = extract_features_batch(windows, cfg.dwt)
    raw, scores = model.predict(X)
    smoothed = smooth_labels(raw, SmoothConfig(cfg.smooth_k))
    events = alarms_from_labels(smoothed, starts, cfg.window.window_len_s)
    return Detection(starts, raw, smoothed, scores, events)


def detect_stream(rec: EegRecording, model, cfg: PipelineConfig):
    """Yield ``("window", start, raw, smoothed, score)`` per window and ``("event", AlarmEvent)``
    as soon as a run of positive smoothed windows closes."""
    rec = prepare(rec, cfg)
    windows, starts, _ = segment_array(rec, None, cfg.window)
    smoother = MajoritySmoother(SmoothConfig(cfg.smooth_k))
    length = cfg.window.window_len_s
    run_start = run_end = None
    for w, s in zip(windows, starts):
        raw, score = model.predict(extract_features(w, cfg.dwt)[None, :])
        raw, score = int(raw[0]), float(score[0])
        sm = smoother.push(raw)
        yield ("window", float(s), raw, sm, score)
        if sm:
            run_start = float(s) if run_start is None else run_start
            run_end = float(s) + length
        elif run_start is not None:
            yield ("event", AlarmEvent(run_start, run_end))
            run_start = None
    if run_start is not None:
        yield ("event", AlarmEvent(run_start, run_end))
