"""Recording-level train/test fold plans."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

SPLIT_MODES = ("global", "subject-specific")


@dataclass(frozen=True)
class RecordingInfo:
    subject: str
    recording_id: str
    n_seizures: int


@dataclass(frozen=True)
class Fold:
    name: str
    subject: str | None
    train: tuple[str, ...]
    test: tuple[str, ...]

    def __post_init__(self):
        overlap = set(self.train) & set(self.test)
        if overlap:
            raise AssertionError(f"fold {self.name}: recordings in both train and test: {sorted(overlap)}")


@dataclass(frozen=True)
class SkipEntry:
    subject: str
    reason: str


@dataclass
class SplitPlan:
    mode: str
    folds: list[Fold] = field(default_factory=list)
    skipped: list[SkipEntry] = field(default_factory=list)

    def describe(self) -> str:
        lines = [f"split mode: {self.mode}, {len(self.folds)} folds"]
        for f in self.folds:
            lines.append(f"  {f.name}: train={list(f.train)} test={list(f.test)}")
        for s in self.skipped:
            lines.append(f"  skipped {s.subject}: {s.reason}")
        return "\n".join(lines)


def make_split(index: list[RecordingInfo], mode: str, seed: int = 0) -> SplitPlan:
    """Build folds.

    subject-specific: per subject, one fold per seizure-bearing recording; the
    seizure-free recordings are dealt round-robin (in seeded random order) to
    those folds as extra test material, and everything else of the subject trains.

    global: leave-one-subject-out.
    """
    if mode not in SPLIT_MODES:
        raise ValueError(f"split mode must be one of {SPLIT_MODES}, got {mode!r}")
    by_subject: dict[str, list[RecordingInfo]] = defaultdict(list)
    for info in index:
        by_subject[info.subject].append(info)
    subjects = sorted(by_subject)
    plan = SplitPlan(mode)
    rng = np.random.default_rng(seed)

    if mode == "subject-specific":
        for subj in subjects:
            recs = sorted(by_subject[subj], key=lambda r: r.recording_id)
            seiz = [r.recording_id for r in recs if r.n_seizures > 0]
            quiet = [r.recording_id for r in recs if r.n_seizures == 0]
            if len(seiz) < 2:
                plan.skipped.append(
                    SkipEntry(subj, f"needs >= 2 seizure recordings, has {len(seiz)}")
                )
                continue
            quiet = [quiet[i] for i in rng.permutation(len(quiet))]
            extra: list[list[str]] = [[] for _ in seiz]
            for j, rid in enumerate(quiet):
                extra[j % len(seiz)].append(rid)
            all_ids = [r.recording_id for r in recs]
            for f, rid in enumerate(seiz):
                test = [rid] + sorted(extra[f])
                train = [r for r in all_ids if r not in test]
                plan.folds.append(Fold(f"{subj}/{rid}", subj, tuple(train), tuple(test)))
        return plan

    if len(subjects) < 2:
        plan.skipped.extend(SkipEntry(s, "leave-one-subject-out needs >= 2 subjects") for s in subjects)
        return plan
    for subj in subjects:
        test = sorted(r.recording_id for r in by_subject[subj])
        train_recs = [r for s in subjects if s != subj for r in by_subject[s]]
        if not any(r.n_seizures > 0 for r in train_recs):
            plan.skipped.append(SkipEntry(subj, "no seizure recordings left for training"))
            continue
        train = sorted(r.recording_id for r in train_recs)
        plan.folds.append(Fold(f"loso/{subj}", subj, tuple(train), tuple(test)))
    return plan
