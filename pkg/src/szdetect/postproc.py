"""Causal majority-vote smoothing of window labels."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SmoothConfig:
    k: int = 3

    def __post_init__(self):
        if self.k < 1 or self.k % 2 == 0:
            raise ValueError(f"k must be a positive odd integer, got {self.k}")


def smooth_labels(labels, cfg: SmoothConfig = SmoothConfig()) -> np.ndarray:
    """``out[t]`` is the majority of ``labels[t-k+1 .. t]``; the first k-1 labels pass through."""
    y = np.asarray(labels, dtype=np.int8)
    k = cfg.k
    if k == 1 or len(y) < k:
        return y.copy()
    csum = np.concatenate(([0], np.cumsum(y, dtype=np.int64)))
    window_sums = csum[k:] - csum[:-k]
    out = y.copy()
    out[k - 1:] = (window_sums > k // 2).astype(np.int8)
    return out


class MajoritySmoother:
    """Streaming form of :func:`smooth_labels` for one label stream."""

    def __init__(self, cfg: SmoothConfig = SmoothConfig()):
        self.k = cfg.k
        self._buf: deque[int] = deque(maxlen=cfg.k)

    def push(self, label: int) -> int:
        self._buf.append(int(label))
        if len(self._buf) < self.k:
            return int(label)
        return int(sum(self._buf) > self.k // 2)
