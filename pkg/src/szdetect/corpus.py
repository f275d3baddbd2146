"""Collections of annotated recordings, on disk or in memory.

On-disk layout (CHB-MIT style)::

    root/<subject>/<recording_id>.edf
    root/<subject>/annotations.csv        # canonical CSV, or
    root/<subject>/<subject>-summary.txt  # CHB-MIT summary text
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from .edf import AnnotationSet, EegRecording, annotations_from_csv, parse_chbmit_summary, read_edf

log = logging.getLogger(__name__)


class CorpusError(FileNotFoundError):
    pass


@dataclass
class CorpusEntry:
    subject: str
    recording_id: str
    annotations: AnnotationSet
    path: Path | None = None
    recording: EegRecording | None = None

    def load(self) -> EegRecording:
        if self.recording is not None:
            return self.recording
        if self.path is None:
            raise CorpusError(f"recording {self.recording_id} has neither data nor a path")
        return read_edf(self.path, recording_id=self.recording_id)


@dataclass
class Corpus:
    entries: list[CorpusEntry]

    def __post_init__(self):
        ids = [e.recording_id for e in self.entries]
        dupes = {i for i in ids if ids.count(i) > 1}
        if dupes:
            raise ValueError(f"duplicate recording ids in corpus: {sorted(dupes)}")
        self.entries = sorted(self.entries, key=lambda e: (e.subject, e.recording_id))

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def by_id(self) -> dict[str, CorpusEntry]:
        return {e.recording_id: e for e in self.entries}

    @property
    def subjects(self) -> list[str]:
        return sorted({e.subject for e in self.entries})

    def excluding(self, names) -> Corpus:
        names = set(names or ())
        return Corpus([e for e in self.entries if e.subject not in names and e.recording_id not in names])


def _subject_annotations(subject_dir: Path) -> dict[str, AnnotationSet]:
    csv_path = subject_dir / "annotations.csv"
    if csv_path.exists():
        return annotations_from_csv(csv_path.read_text(encoding="utf-8"))
    summaries = sorted(subject_dir.glob("*summary*.txt"))
    result: dict[str, AnnotationSet] = {}
    for s in summaries:
        for ann in parse_chbmit_summary(s.read_text(encoding="utf-8", errors="replace")):
            result[ann.recording_id] = ann
    return result


def load_corpus(root: str | Path, exclude=()) -> Corpus:
    """Index a corpus directory. EDF files are read lazily."""
    root = Path(root)
    if not root.is_dir():
        raise CorpusError(f"corpus directory {root} does not exist")
    entries = []
    for subject_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        edfs = sorted(subject_dir.glob("*.edf"))
        if not edfs:
            continue
        anns = _subject_annotations(subject_dir)
        for path in edfs:
            rid = path.stem
            ann = anns.get(rid, AnnotationSet(rid))
            entries.append(CorpusEntry(subject_dir.name, rid, ann, path=path))
    if not entries:
        raise CorpusError(f"no EDF recordings found under {root}")
    return Corpus(entries).excluding(exclude)
