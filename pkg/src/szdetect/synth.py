"""Synthetic EEG with scripted ictal segments, for fixtures and end-to-end runs.

Background is 1/f-shaped noise plus a weak alpha rhythm. Seizures are
band-limited, high-amplitude bursts with smooth on/offsets.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .edf import CHBMIT_CHANNELS, AnnotationSet, EegRecording, recording_from_physical, write_edf


def band_noise(rng: np.random.Generator, n: int, fs: float, lo: float, hi: float) -> np.ndarray:
    """Unit-variance noise with energy only in [lo, hi] Hz."""
    spec = np.fft.rfft(rng.standard_normal(n))
    f = np.fft.rfftfreq(n, 1 / fs)
    spec[(f < lo) | (f > hi)] = 0
    x = np.fft.irfft(spec, n)
    sd = x.std()
    return x / sd if sd > 0 else x


def pink_noise(rng: np.random.Generator, shape: tuple[int, int], fs: float) -> np.ndarray:
    spec = np.fft.rfft(rng.standard_normal(shape), axis=-1)
    f = np.fft.rfftfreq(shape[-1], 1 / fs)
    spec *= np.where(f > 0.5, 1 / np.sqrt(np.maximum(f, 0.5)), 0.0)
    x = np.fft.irfft(spec, shape[-1], axis=-1)
    return x / x.std(axis=-1, keepdims=True)


@dataclass(frozen=True)
class IctalPattern:
    band_hz: tuple[float, float] = (3.0, 7.0)
    amplitude_uv: float = 220.0
    ramp_s: float = 0.25


def synth_recording(
    recording_id: str,
    duration_s: int,
    seizures=(),
    *,
    seed: int = 0,
    fs: int = 256,
    labels=CHBMIT_CHANNELS,
    background_uv: float = 30.0,
    pattern: IctalPattern = IctalPattern(),
) -> EegRecording:
    rng = np.random.default_rng(seed)
    n = duration_s * fs
    uniq = list(dict.fromkeys(labels))
    data = background_uv * pink_noise(rng, (len(uniq), n), fs)
    t = np.arange(n) / fs
    data += 0.3 * background_uv * np.sin(2 * np.pi * 10.0 * t + rng.uniform(0, 2 * np.pi, (len(uniq), 1)))
    for a, b in seizures:
        env = np.clip(np.minimum(t - a, b - t) / pattern.ramp_s, 0, 1)
        burst = band_noise(rng, n, fs, *pattern.band_hz)
        gains = rng.uniform(0.7, 1.0, (len(uniq), 1))
        data += pattern.amplitude_uv * gains * env * burst
    rows = {lab: data[i] for i, lab in enumerate(uniq)}
    return recording_from_physical(recording_id, list(labels), np.stack([rows[lab] for lab in labels]), fs)


def _summary_text(subject: str, recs: list[tuple[str, list[tuple[float, float]]]]) -> str:
    lines = ["Data Sampling Rate: 256 Hz", "*************************", ""]
    for rid, seizures in recs:
        lines.append(f"File Name: {rid}.edf")
        lines.append(f"Number of Seizures in File: {len(seizures)}")
        for k, (a, b) in enumerate(seizures, start=1):
            lines.append(f"Seizure {k} Start Time: {a:g} seconds")
            lines.append(f"Seizure {k} End Time: {b:g} seconds")
        lines.append("")
    return "\n".join(lines)


def make_mini_corpus(
    root: str | Path,
    *,
    n_subjects: int = 4,
    seizure_recordings: int = 3,
    quiet_recordings: int = 1,
    duration_s: int = 300,
    seed: int = 0,
    labels=CHBMIT_CHANNELS,
) -> dict[str, AnnotationSet]:
    """Write a CHB-MIT-shaped corpus of EDF files and summary texts; returns the annotations."""
    root = Path(root)
    rng = np.random.default_rng(seed)
    annotations = {}
    for s in range(1, n_subjects + 1):
        subject = f"chb{s:02d}"
        sdir = root / subject
        sdir.mkdir(parents=True, exist_ok=True)
        lo = float(rng.uniform(2.5, 5.0))
        pattern = IctalPattern(band_hz=(lo, lo + rng.uniform(3.0, 6.0)), amplitude_uv=float(rng.uniform(180, 260)))
        recs = []
        for r in range(1, seizure_recordings + quiet_recordings + 1):
            rid = f"{subject}_{r:02d}"
            seizures = []
            if r <= seizure_recordings:
                length = float(rng.integers(40, 70))
                start = float(rng.integers(30, duration_s - int(length) - 30))
                seizures = [(start, start + length)]
            rec = synth_recording(
                rid, duration_s, seizures, seed=int(rng.integers(2**31)), labels=labels, pattern=pattern
            )
            write_edf(sdir / f"{rid}.edf", rec)
            recs.append((rid, seizures))
            annotations[rid] = AnnotationSet(rid, tuple(seizures))
        (sdir / f"{subject}-summary.txt").write_text(_summary_text(subject, recs), encoding="utf-8")
    return annotations
