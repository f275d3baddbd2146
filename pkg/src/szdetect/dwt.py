"""Multilevel discrete wavelet transform and per-subband window statistics.

All transforms work along the last axis, so a batch of windows shaped
(windows, channels, samples) is decomposed in one call.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

# Daubechies scaling (reconstruction low-pass) filters; the analysis filter is the reverse.
_DB_RECONSTRUCTION = {
    "haar": (1 / math.sqrt(2), 1 / math.sqrt(2)),
    "db2": (
        0.48296291314453416, 0.8365163037378079, 0.2241438680420134, -0.12940952255126037,
    ),
    "db4": (
        0.23037781330889650, 0.71484657055291570, 0.63088076792985890, -0.02798376941685985,
        -0.18703481171909310, 0.03084138183556076, 0.03288301166688520, -0.01059740178506903,
    ),
}

STATISTICS = ("mav", "power", "std", "rel_energy")
MODES = ("symmetric", "periodic")


class DwtError(ValueError):
    pass


@dataclass(frozen=True)
class Wavelet:
    name: str
    h: tuple[float, ...]  # analysis low-pass
    g: tuple[float, ...]  # analysis high-pass

    def __post_init__(self):
        if len(self.h) != len(self.g):
            raise DwtError("low-pass and high-pass filters must have equal length")

    @classmethod
    def from_lowpass(cls, name: str, h) -> Wavelet:
        h = tuple(float(v) for v in h)
        n = len(h)
        g = tuple((-1) ** k * h[n - 1 - k] for k in range(n))
        return cls(name, h, g)

    def __len__(self) -> int:
        return len(self.h)


def get_wavelet(name: str) -> Wavelet:
    key = name.lower()
    if key == "db1":
        key = "haar"
    if key not in _DB_RECONSTRUCTION:
        raise DwtError(f"unknown wavelet {name!r}; available: {sorted(_DB_RECONSTRUCTION)}")
    return Wavelet.from_lowpass(key, reversed(_DB_RECONSTRUCTION[key]))


@dataclass(frozen=True)
class DwtConfig:
    levels: int = 4
    wavelet: str = "db4"
    mode: str = "symmetric"
    statistics: tuple[str, ...] = field(default=STATISTICS)

    def __post_init__(self):
        if self.levels < 1:
            raise DwtError("levels must be >= 1")
        if self.mode not in MODES:
            raise DwtError(f"mode must be one of {MODES}")
        if tuple(self.statistics) != STATISTICS:
            raise DwtError(f"only the statistics set {STATISTICS} is supported")
        get_wavelet(self.wavelet)

    @property
    def n_subbands(self) -> int:
        return self.levels + 1

    def subband_names(self) -> list[str]:
        return [f"A{self.levels}"] + [f"D{k}" for k in range(self.levels, 0, -1)]

    def feature_names(self, channels) -> list[str]:
        return [
            f"{ch}:{band}:{stat}"
            for ch in channels
            for band in self.subband_names()
            for stat in self.statistics
        ]


@lru_cache(maxsize=256)
def _gather_index(n: int, taps: int, mode: str) -> np.ndarray:
    out_len = (n + 1) // 2
    idx = 2 * np.arange(out_len)[:, None] + 1 - np.arange(taps)[None, :]
    if mode == "periodic":
        idx = idx % n
    else:
        # half-sample symmetric: x[-1] = x[0], x[n] = x[n-1]
        idx = idx % (2 * n)
        idx = np.where(idx >= n, 2 * n - 1 - idx, idx)
    idx.setflags(write=False)
    return idx


def dwt_single_level(signal, h, g, mode: str = "symmetric"):
    """One analysis step: filter with ``h``/``g`` and keep every second output.

    ``approx[k] = sum_j h[j] * x_ext[2k + 1 - j]``; outputs have ``ceil(n / 2)`` samples.
    """
    x = np.asarray(signal, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    n = x.shape[-1]
    if n < len(h):
        raise DwtError(f"signal of length {n} is shorter than the {len(h)}-tap filter")
    idx = _gather_index(n, len(h), mode)
    # tap-by-tap elementwise accumulation: every output is computed in the same
    # order whatever the batch shape, so batched and single-window features agree bitwise
    approx = np.zeros(x.shape[:-1] + (idx.shape[0],))
    detail = np.zeros_like(approx)
    for j in range(len(h)):
        col = x[..., idx[:, j]]
        approx += h[j] * col
        detail += g[j] * col
    return approx, detail


def dwt_multilevel(signal, cfg: DwtConfig = DwtConfig()) -> list[np.ndarray]:
    """Return ``[A_L, D_L, ..., D_1]``; each approximation feeds the next level."""
    x = np.asarray(signal, dtype=np.float64)
    if x.shape[-1] < 2 ** cfg.levels:
        raise DwtError(f"signal of length {x.shape[-1]} is too short for {cfg.levels} levels")
    w = get_wavelet(cfg.wavelet)
    details = []
    approx = x
    for _ in range(cfg.levels):
        approx, d = dwt_single_level(approx, w.h, w.g, cfg.mode)
        details.append(d)
    return [approx] + details[::-1]


def subband_statistics(subbands: list[np.ndarray]) -> np.ndarray:
    """Stack (mav, power, std, rel_energy) per subband -> shape (..., n_subbands, 4)."""
    energies = np.stack([np.sum(b * b, axis=-1) for b in subbands], axis=-1)
    total = energies.sum(axis=-1, keepdims=True)
    rel = np.divide(energies, total, out=np.zeros_like(energies), where=total > 0)
    stats = []
    for i, b in enumerate(subbands):
        stats.append(
            np.stack(
                [np.mean(np.abs(b), axis=-1), np.mean(b * b, axis=-1), np.std(b, axis=-1), rel[..., i]],
                axis=-1,
            )
        )
    return np.stack(stats, axis=-2)


def extract_features_batch(windows, cfg: DwtConfig = DwtConfig()) -> np.ndarray:
    """Features for windows shaped (n, channels, samples) -> (n, channels * subbands * 4)."""
    w = np.asarray(windows, dtype=np.float64)
    if w.ndim != 3:
        raise DwtError(f"expected (windows, channels, samples), got shape {w.shape}")
    stats = subband_statistics(dwt_multilevel(w, cfg))
    return stats.reshape(w.shape[0], -1)


def extract_features(window, cfg: DwtConfig = DwtConfig()) -> np.ndarray:
    """Feature vector for one window (a LabeledWindow or a channels x samples array).

    Layout is channel-major, subbands ``[A4, D4, D3, D2, D1]``, then statistics
    ``(mav, power, std, rel_energy)``.
    """
    samples = getattr(window, "samples", window)
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 1:
        samples = samples[None, :]
    return extract_features_batch(samples[None], cfg)[0]


# ---------------------------------------------------------------------------
# Feature matrix CSV
# ---------------------------------------------------------------------------


def features_to_csv(recording_ids, starts, labels, X) -> str:
    X = np.asarray(X, dtype=np.float64)
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["recording_id", "start_s", "label"] + [f"f{i}" for i in range(X.shape[1])])
    for rid, s, y, row in zip(recording_ids, starts, labels, X):
        w.writerow([rid, repr(float(s)), int(y)] + [repr(float(v)) for v in row])
    return out.getvalue()


def features_from_csv(text: str):
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][:3] != ["recording_id", "start_s", "label"]:
        raise ValueError("feature CSV must start with recording_id,start_s,label")
    body = rows[1:]
    ids = [r[0] for r in body]
    starts = np.array([float(r[1]) for r in body])
    labels = np.array([int(r[2]) for r in body], dtype=np.int8)
    X = np.array([[float(v) for v in r[3:]] for r in body], dtype=np.float64).reshape(len(body), -1)
    return ids, starts, labels, X
