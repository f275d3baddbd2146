"""Window-level and event-level detection metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..edf import AnnotationSet


@dataclass(frozen=True)
class AlarmEvent:
    start_s: float
    end_s: float

    def overlaps(self, a: float, b: float) -> bool:
        return self.start_s < b and self.end_s > a


@dataclass(frozen=True)
class Confusion:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __add__(self, other: Confusion) -> Confusion:
        return Confusion(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)

    @property
    def specificity(self) -> float | None:
        d = self.tn + self.fp
        return 100.0 * self.tn / d if d else None

    @property
    def sensitivity(self) -> float | None:
        d = self.tp + self.fn
        return 100.0 * self.tp / d if d else None


def confusion(pred, truth) -> Confusion:
    p = np.asarray(pred).astype(bool)
    t = np.asarray(truth).astype(bool)
    if p.shape != t.shape:
        raise ValueError(f"length mismatch: {p.shape} predictions vs {t.shape} labels")
    return Confusion(
        tp=int(np.sum(p & t)), fp=int(np.sum(p & ~t)), tn=int(np.sum(~p & ~t)), fn=int(np.sum(~p & t))
    )


def window_metrics(pred, truth) -> tuple[float | None, float | None]:
    """(specificity %, sensitivity %); ``None`` where the denominator is zero."""
    if len(pred) < 1:
        raise ValueError("need at least one window")
    c = confusion(pred, truth)
    return c.specificity, c.sensitivity


def alarms_from_labels(labels, starts, lengths) -> list[AlarmEvent]:
    """Merge maximal runs of positive windows into events [first start, last end)."""
    y = np.asarray(labels).astype(bool)
    starts = np.asarray(starts, dtype=np.float64)
    ends = starts + np.broadcast_to(np.asarray(lengths, dtype=np.float64), starts.shape)
    if not y.any():
        return []
    padded = np.concatenate(([False], y, [False])).astype(np.int8)
    edges = np.diff(padded)
    run_start = np.flatnonzero(edges == 1)
    run_end = np.flatnonzero(edges == -1) - 1
    return [AlarmEvent(float(starts[a]), float(ends[b])) for a, b in zip(run_start, run_end)]


@dataclass(frozen=True)
class EventCounts:
    seizures: int = 0
    detected: int = 0
    events: int = 0
    false_events: int = 0
    hours: float = 0.0

    def __add__(self, other: EventCounts) -> EventCounts:
        return EventCounts(
            self.seizures + other.seizures,
            self.detected + other.detected,
            self.events + other.events,
            self.false_events + other.false_events,
            self.hours + other.hours,
        )

    @property
    def sensitivity(self) -> float | None:
        return 100.0 * self.detected / self.seizures if self.seizures else None

    @property
    def fp_per_hour(self) -> float:
        return self.false_events / self.hours if self.hours > 0 else 0.0


def event_counts(events: list[AlarmEvent], ann: AnnotationSet | None, total_hours: float) -> EventCounts:
    if not total_hours > 0:
        raise ValueError("total_hours must be positive")
    seizures = ann.seizures if ann is not None else ()
    detected = sum(any(e.overlaps(a, b) for e in events) for a, b in seizures)
    false = sum(not any(e.overlaps(a, b) for a, b in seizures) for e in events)
    return EventCounts(len(seizures), detected, len(events), false, total_hours)


def event_scores(events: list[AlarmEvent], ann: AnnotationSet | None, total_hours: float):
    """(event sensitivity %, false alarms per hour); sensitivity is ``None`` without seizures."""
    c = event_counts(events, ann, total_hours)
    return c.sensitivity, c.fp_per_hour
