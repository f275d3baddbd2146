"""Fold-wise training/testing and Table-I-style report rows."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable

import numpy as np

from ..corpus import Corpus
from ..dwt import DwtConfig, extract_features_batch
from ..edf import TEMPORAL_CHANNELS, select_channels
from ..models import ALGORITHMS, TrainConfig, train
from ..postproc import SmoothConfig, smooth_labels
from ..windower import WindowConfig, segment_array
from .metrics import Confusion, EventCounts, alarms_from_labels, confusion, event_counts
from .splits import SPLIT_MODES, RecordingInfo, SplitPlan, make_split

log = logging.getLogger(__name__)

REPORT_VERSION = 1
REPORT_COLUMNS = (
    "split", "channels", "n_channels", "window_s", "stride_s", "smoothing", "algorithm", "weights",
    "specificity", "sensitivity_window", "sensitivity_event", "fp_per_hour",
    "folds", "windows", "seizures", "hours", "flagged", "config_hash",
    "ref_specificity", "ref_sensitivity", "ref_fp_per_hour",
)

# Reported cells of the reference comparison table, balanced class weights:
# (split, channels, window_s, smoothing) -> {algorithm: (specificity, sensitivity, FP/h)}
REFERENCE_TABLE = {
    ("global", "all", 2, False): {
        "SVM": (95.9, 72.7, 73.5), "RF": (99.9, 39.0, 1.8), "ET": (99.9, 34.8, 1.6), "AB": (94.0, 84.6, 107.8)},
    ("global", "temporal", 2, False): {
        "SVM": (96.3, 75.1, 65.9), "RF": (99.9, 41.2, 2.2), "ET": (99.9, 35.2, 1.6), "AB": (98.5, 84.3, 27.2)},
    ("global", "temporal", 8, False): {
        "SVM": (96.3, 75.1, 16.5), "RF": (99.9, 48.5, 0.4), "ET": (99.9, 42.3, 0.09), "AB": (98.1, 77.3, 8.3)},
    ("global", "temporal", 8, True): {
        "SVM": (97.1, 81.1, 13.1), "RF": (99.9, 49.5, 0.4), "ET": (99.9, 47.3, 0.09), "AB": (99.1, 85.3, 3.6)},
    ("subject-specific", "all", 2, False): {
        "SVM": (97.9, 84.2, 37.8), "RF": (99.9, 63.6, 2.2), "ET": (99.9, 65.1, 1.8), "AB": (99.4, 87.8, 10.3)},
    ("subject-specific", "temporal", 2, False): {
        "SVM": (99.1, 88.9, 17.1), "RF": (99.8, 86.7, 3.8), "ET": (99.8, 89.2, 2.5), "AB": (99.4, 88.9, 10.2)},
    ("subject-specific", "temporal", 8, False): {
        "SVM": (98.9, 100.0, 5.1), "RF": (99.9, 100.0, 0.5), "ET": (99.8, 100.0, 1.0), "AB": (99.9, 100.0, 0.4)},
    ("subject-specific", "temporal", 8, True): {
        "SVM": (99.4, 100.0, 2.7), "RF": (100.0, 100.0, 0.0), "ET": (100.0, 100.0, 0.0), "AB": (100.0, 100.0, 0.0)},
}

FOOTNOTES = (
    "global rows use leave-one-subject-out folds; the reference global cells may come from a different protocol",
    "reference values are printed for comparison only; wavelet, features and hyperparameters differ",
    "FP/h denominator is the full analyzed test duration",
)


@dataclass(frozen=True)
class ScenarioConfig:
    split: str = "subject-specific"
    channel_sets: tuple[str, ...] = ("temporal",)
    windows: tuple[int, ...] = (8,)
    stride_s: float | None = None
    dwt: DwtConfig = DwtConfig()
    algorithms: tuple[str, ...] = ("RF", "ET", "AB")
    weights: tuple = ("balanced",)
    smoothing: tuple[bool, ...] = (True,)
    smooth_k: int = 3
    seed: int = 0
    train: TrainConfig = TrainConfig()
    workers: int = 1

    def __post_init__(self):
        if self.split not in SPLIT_MODES:
            raise ValueError(f"split mode must be one of {SPLIT_MODES}, got {self.split!r}")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {a!r}")
        for c in self.channel_sets:
            if c not in ("all", "temporal"):
                raise ValueError(f"channel set must be 'all' or 'temporal', got {c!r}")
        for w in self.windows:
            WindowConfig(w, self.stride_s)
        SmoothConfig(self.smooth_k)
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class RecordingFeatures:
    recording_id: str
    starts: np.ndarray
    labels: np.ndarray
    X: np.ndarray
    window_s: float
    duration_s: float


@dataclass
class ReportRow:
    split: str
    channels: str
    n_channels: int
    window_s: float
    stride_s: float
    smoothing: bool
    algorithm: str
    weights: str
    confusion: Confusion = field(default_factory=Confusion)
    events: EventCounts = field(default_factory=EventCounts)
    folds: int = 0
    flagged: list[str] = field(default_factory=list)
    config_hash: str = ""

    @property
    def reference(self):
        if self.weights != "balanced":
            return None
        cell = REFERENCE_TABLE.get((self.split, self.channels, int(self.window_s), self.smoothing))
        return None if cell is None else cell.get(self.algorithm)

    def values(self) -> dict:
        ref = self.reference or (None, None, None)
        return {
            "split": self.split,
            "channels": self.channels,
            "n_channels": self.n_channels,
            "window_s": _num(self.window_s),
            "stride_s": _num(self.stride_s),
            "smoothing": "on" if self.smoothing else "off",
            "algorithm": self.algorithm,
            "weights": self.weights,
            "specificity": _pct(self.confusion.specificity),
            "sensitivity_window": _pct(self.confusion.sensitivity),
            "sensitivity_event": _pct(self.events.sensitivity),
            "fp_per_hour": f"{self.events.fp_per_hour:.4f}",
            "folds": self.folds,
            "windows": self.confusion.tp + self.confusion.fp + self.confusion.tn + self.confusion.fn,
            "seizures": self.events.seizures,
            "hours": f"{self.events.hours:.4f}",
            "flagged": ";".join(self.flagged),
            "config_hash": self.config_hash,
            "ref_specificity": "" if ref[0] is None else f"{ref[0]}",
            "ref_sensitivity": "" if ref[1] is None else f"{ref[1]}",
            "ref_fp_per_hour": "" if ref[2] is None else f"{ref[2]}",
        }


def _pct(v):
    return "n/a" if v is None else f"{v:.4f}"


def _num(v) -> str:
    v = float(v)
    return str(int(v)) if v == int(v) else repr(v)


@dataclass
class EvalReport:
    rows: list[ReportRow]
    plan: SplitPlan
    config: dict
    footnotes: tuple[str, ...] = FOOTNOTES

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.DictWriter(out, fieldnames=REPORT_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in self.rows:
            w.writerow(row.values())
        return out.getvalue()

    def table(self) -> str:
        return format_table(self)


def config_fingerprint(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:12]


def weights_label(w) -> str:
    if w == "balanced":
        return "balanced"
    return f"ratio:{_num(w)}"


def resolve_channels(name: str, corpus: Corpus) -> tuple[str, ...]:
    if name == "temporal":
        return TEMPORAL_CHANNELS
    first = corpus.entries[0].load()
    return tuple(first.labels)


def recording_features(entry, labels, wcfg: WindowConfig, dcfg: DwtConfig, chunk: int = 64) -> RecordingFeatures:
    rec = select_channels(entry.load(), labels, allow_identical_duplicates=True)
    entry.annotations.check_within(rec.duration_s)
    windows, starts, y = segment_array(rec, entry.annotations, wcfg)
    X = np.concatenate(
        [extract_features_batch(windows[i:i + chunk], dcfg) for i in range(0, len(windows), chunk)]
    )
    return RecordingFeatures(entry.recording_id, starts, y, X, wcfg.window_len_s, rec.duration_s)


def compute_corpus_features(corpus: Corpus, cfg: ScenarioConfig):
    """Features for every (channel set, window) cell and recording."""
    jobs = []
    channel_map = {c: resolve_channels(c, corpus) for c in cfg.channel_sets}
    for c in cfg.channel_sets:
        for w in cfg.windows:
            for e in corpus:
                jobs.append((c, w, e))

    def work(job):
        c, w, e = job
        return recording_features(e, channel_map[c], WindowConfig(w, cfg.stride_s), cfg.dwt)

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(j) for j in jobs]
    feats: dict[tuple[str, int], dict[str, RecordingFeatures]] = {}
    for (c, w, e), r in zip(jobs, results):
        feats.setdefault((c, w), {})[e.recording_id] = r
    return feats, channel_map


def corpus_index(corpus: Corpus) -> list[RecordingInfo]:
    return [RecordingInfo(e.subject, e.recording_id, len(e.annotations.seizures)) for e in corpus]


FitFn = Callable[[np.ndarray, np.ndarray, TrainConfig], object]


def _run_fold(fold, corpus, cfg, feats, fit: FitFn):
    """Returns {cell key: (Confusion, EventCounts)} and {cell key: error message}."""
    anns = {e.recording_id: e.annotations for e in corpus}
    results, errors = {}, {}
    for (chan, win), per_rec in feats.items():
        train_ids = [r for r in fold.train if r in per_rec]
        assert not set(train_ids) & set(fold.test), f"leak in fold {fold.name}"
        Xtr = np.concatenate([per_rec[r].X for r in train_ids])
        ytr = np.concatenate([per_rec[r].labels for r in train_ids])
        for algo in cfg.algorithms:
            for wt in cfg.weights:
                tcfg = replace(cfg.train, algorithm=algo, weights=wt, seed=cfg.seed)
                try:
                    model = fit(Xtr, ytr, tcfg)
                except Exception as exc:  # a failed fold flags the row, the run goes on
                    log.warning("fold %s %s/%s failed: %s", fold.name, algo, wt, exc)
                    for sm in cfg.smoothing:
                        errors[(chan, win, algo, weights_label(wt), sm)] = f"{fold.name}: {exc}"
                    continue
                acc = {sm: (Confusion(), EventCounts()) for sm in cfg.smoothing}
                for rid in fold.test:
                    rf = per_rec[rid]
                    raw, _ = model.predict(rf.X)
                    for sm in cfg.smoothing:
                        pred = smooth_labels(raw, SmoothConfig(cfg.smooth_k)) if sm else raw
                        events = alarms_from_labels(pred, rf.starts, rf.window_s)
                        c, ev = acc[sm]
                        acc[sm] = (
                            c + confusion(pred, rf.labels),
                            ev + event_counts(events, anns[rid], rf.duration_s / 3600.0),
                        )
                for sm, value in acc.items():
                    results[(chan, win, algo, weights_label(wt), sm)] = value
    return results, errors


def run_scenario(corpus: Corpus, cfg: ScenarioConfig, fit: FitFn | None = None) -> EvalReport:
    """segment -> features -> train -> predict -> (smooth) -> metrics, per fold; pooled per cell."""
    fit = fit or (lambda X, y, tcfg: train(X, y, tcfg))
    plan = make_split(corpus_index(corpus), cfg.split, cfg.seed)
    feats, channel_map = compute_corpus_features(corpus, cfg)

    if cfg.workers > 1 and len(plan.folds) > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            fold_results = list(pool.map(lambda f: _run_fold(f, corpus, cfg, feats, fit), plan.folds))
    else:
        fold_results = [_run_fold(f, corpus, cfg, feats, fit) for f in plan.folds]

    rows = []
    base = _config_dict(cfg)
    for chan in cfg.channel_sets:
        for win in cfg.windows:
            stride = WindowConfig(win, cfg.stride_s).stride_s
            for algo in cfg.algorithms:
                for wt in cfg.weights:
                    for sm in cfg.smoothing:
                        key = (chan, win, algo, weights_label(wt), sm)
                        row = ReportRow(
                            split=cfg.split, channels=chan, n_channels=len(channel_map[chan]),
                            window_s=win, stride_s=stride, smoothing=sm, algorithm=algo,
                            weights=weights_label(wt),
                        )
                        for res, err in fold_results:
                            if key in res:
                                c, ev = res[key]
                                row.confusion = row.confusion + c
                                row.events = row.events + ev
                                row.folds += 1
                            if key in err:
                                row.flagged.append(err[key])
                        row.config_hash = config_fingerprint({
                            **base, "channels": channel_map[chan], "window_s": win, "stride_s": stride,
                            "algorithm": algo, "weights": weights_label(wt), "smoothing": sm,
                        })
                        rows.append(row)
    return EvalReport(rows=rows, plan=plan, config=base)


def _config_dict(cfg: ScenarioConfig) -> dict:
    d = asdict(cfg)
    # results do not depend on parallelism, so it stays out of the fingerprint
    d.pop("workers")
    d["train"].pop("workers")
    d["report_version"] = REPORT_VERSION
    return json.loads(json.dumps(d, default=str))


def format_table(report: EvalReport) -> str:
    """Console table grouped like the reference table: one block per split/channels/window/smoothing."""
    lines = []
    groups: dict[tuple, list[ReportRow]] = {}
    for r in report.rows:
        groups.setdefault((r.split, r.channels, r.window_s, r.smoothing, r.weights), []).append(r)
    for (split, chan, win, sm, wt), rows in groups.items():
        head = f"{split} | {chan} channels | {_num(win)} s window | {'w' if sm else 'w/o'} smoothing | weights {wt}"
        lines.append(head)
        lines.append("-" * len(head))
        lines.append(f"{'':<18}" + "".join(f"{r.algorithm:>16}" for r in rows))
        for label, get, ref_i in (
            ("Specificity [%]", lambda r: _pct(r.confusion.specificity), 0),
            ("Sensitivity [%]", lambda r: _pct(r.confusion.sensitivity), 1),
            ("Event sens. [%]", lambda r: _pct(r.events.sensitivity), None),
            ("FP/h", lambda r: f"{r.events.fp_per_hour:.3f}", 2),
        ):
            cells = []
            for r in rows:
                ref = r.reference
                extra = f" ({ref[ref_i]:g})" if ref is not None and ref_i is not None else ""
                cells.append(f"{get(r) + extra:>16}")
            lines.append(f"{label:<18}" + "".join(cells))
        flagged = [f for r in rows for f in r.flagged]
        if flagged:
            lines.append(f"flagged folds: {len(flagged)}")
        lines.append("")
    for s in report.plan.skipped:
        lines.append(f"skipped {s.subject}: {s.reason}")
    lines.append("reference values in parentheses; notes:")
    lines.extend(f"  - {n}" for n in report.footnotes)
    return "\n".join(lines)
