"""Fixed-length windowing with seizure labels."""

from __future__ import annotations

import math
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from .edf import AnnotationSet, EegRecording

WINDOW_LENGTHS = (2, 4, 8)
MIN_WINDOW_SAMPLES = 16  # 2**4, so a 4-level DWT is always defined


class WindowConfigError(ValueError):
    pass


@dataclass(frozen=True)
class WindowConfig:
    window_len_s: float = 8
    stride_s: float | None = None  # None -> non-overlapping

    def __post_init__(self):
        if self.window_len_s not in WINDOW_LENGTHS:
            raise WindowConfigError(f"window_len_s must be one of {WINDOW_LENGTHS}, got {self.window_len_s}")
        if self.stride_s is None:
            object.__setattr__(self, "stride_s", self.window_len_s)
        if not 0 < self.stride_s <= self.window_len_s:
            raise WindowConfigError(
                f"stride_s must be in (0, window_len_s={self.window_len_s}], got {self.stride_s}"
            )

    def samples(self, fs: float) -> tuple[int, int]:
        """Window and stride length in samples at rate ``fs``."""
        n = self.window_len_s * fs
        step = self.stride_s * fs
        if n != int(n) or step != int(step):
            raise WindowConfigError(f"window/stride are not whole sample counts at {fs} Hz")
        if n < MIN_WINDOW_SAMPLES:
            raise WindowConfigError(f"window has {int(n)} samples, need at least {MIN_WINDOW_SAMPLES}")
        return int(n), int(step)


@dataclass(frozen=True)
class LabeledWindow:
    recording_id: str
    start_s: float
    samples: np.ndarray  # (channels, window samples)
    label: int


def window_count(duration_s: float, cfg: WindowConfig) -> int:
    if duration_s < cfg.window_len_s:
        return 0
    return math.floor((duration_s - cfg.window_len_s) / cfg.stride_s + 1e-9) + 1


def window_labels(starts: np.ndarray, length_s: float, ann: AnnotationSet | None) -> np.ndarray:
    """1 where [start, start + length) overlaps a seizure by more than zero seconds."""
    starts = np.asarray(starts, dtype=np.float64)
    labels = np.zeros(len(starts), dtype=np.int8)
    if ann is None:
        return labels
    ends = starts + length_s
    for a, b in ann.seizures:
        labels |= ((starts < b) & (ends > a)).astype(np.int8)
    return labels


def window_starts(rec: EegRecording, cfg: WindowConfig) -> np.ndarray:
    fs = rec.sampling_rate
    _, step = cfg.samples(fs)
    n = window_count(rec.duration_s, cfg)
    return np.arange(n) * step / fs


def segment_array(rec: EegRecording, ann: AnnotationSet | None, cfg: WindowConfig):
    """Vectorized segmentation.

    Returns ``(windows, starts, labels)`` with ``windows`` a read-only strided view of
    shape (n_windows, channels, window samples).
    """
    if rec.n_samples == 0:
        raise ValueError(f"recording {rec.recording_id!r} is empty")
    fs = rec.sampling_rate
    n, step = cfg.samples(fs)
    count = window_count(rec.duration_s, cfg)
    if count == 0:
        raise ValueError(
            f"recording {rec.recording_id!r} ({rec.duration_s} s) is shorter than one window"
        )
    view = np.lib.stride_tricks.sliding_window_view(rec.data, n, axis=1)[:, ::step][:, :count]
    windows = view.transpose(1, 0, 2)
    starts = np.arange(count) * step / fs
    return windows, starts, window_labels(starts, cfg.window_len_s, ann)


def segment(rec: EegRecording, ann: AnnotationSet | None, cfg: WindowConfig) -> Iterator[LabeledWindow]:
    """Yield labeled windows starting at 0, stride, 2*stride, ...; the partial tail is dropped."""
    windows, starts, labels = segment_array(rec, ann, cfg)
    for w, s, y in zip(windows, starts, labels):
        yield LabeledWindow(rec.recording_id, float(s), w, int(y))
