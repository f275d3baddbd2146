"""Host-side inference latency and worker-count speedup.

Workers are threads over contiguous slices of the batch. The tree and kernel
evaluations are numpy array operations, which release the GIL for the bulk of
their work.
"""

from __future__ import annotations

import csv
import io
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .edf import EegRecording
from .pipeline import PipelineConfig, detect_offline, detect_stream

log = logging.getLogger(__name__)

BENCH_COLUMNS = ("algorithm", "batch", "workers", "median_us", "p95_us", "speedup", "energy_uj")
MIN_BATCH = 1000


class BenchCorrectnessError(RuntimeError):
    pass


@dataclass(frozen=True)
class BenchResult:
    algorithm: str
    batch: int
    workers: int
    median_us: float
    p95_us: float
    speedup: float
    repeats: int
    n_features: int = 0
    note: str = ""

    def row(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "batch": self.batch,
            "workers": self.workers,
            "median_us": f"{self.median_us:.4f}",
            "p95_us": f"{self.p95_us:.4f}",
            "speedup": f"{self.speedup:.3f}",
            "energy_uj": "",  # needs external power instrumentation
        }


def _timed(fn, repeats: int, warmup: int) -> list[float]:
    for _ in range(warmup):
        fn()
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return times


def bench_inference(model, X, worker_counts=(1, 2, 4, 8), repeats: int = 30, warmup: int = 3) -> list[BenchResult]:
    """Time batch prediction for each worker count.

    Each configuration must reproduce the sequential labels and scores exactly
    before its timing is accepted.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    n = len(X)
    if n < MIN_BATCH:
        raise ValueError(f"batch must hold at least {MIN_BATCH} feature vectors, got {n}")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    ref_labels, ref_scores = model.predict(X)
    counts = sorted(set(worker_counts) | {1})

    medians: dict[int, tuple[float, float]] = {}
    for wc in counts:
        chunks = [X[idx] for idx in np.array_split(np.arange(n), wc)]
        if sum(len(c) for c in chunks) != n:
            raise BenchCorrectnessError("work partition does not cover the batch")
        with ThreadPoolExecutor(wc) as pool:
            def run():
                return list(pool.map(model.predict, chunks))

            parts = run()
            labels = np.concatenate([p[0] for p in parts])
            scores = np.concatenate([p[1] for p in parts])
            if not (np.array_equal(labels, ref_labels) and np.array_equal(scores, ref_scores)):
                raise BenchCorrectnessError(f"{wc}-worker predictions differ from the sequential run")
            times = _timed(run, repeats, warmup)
        per = np.array(times) / n * 1e6
        medians[wc] = (float(np.median(per)), float(np.percentile(per, 95)))

    base = medians[1][0]
    algo = getattr(model, "algorithm", type(model).__name__)
    return [
        BenchResult(
            algorithm=algo, batch=n, workers=wc, median_us=medians[wc][0], p95_us=medians[wc][1],
            speedup=1.0 if wc == 1 else base / medians[wc][0], repeats=repeats, n_features=X.shape[1],
        )
        for wc in counts
        if wc in worker_counts or wc == 1
    ]


@dataclass(frozen=True)
class PipelineBench:
    result: BenchResult
    stride_s: float
    realtime: bool
    matches_offline: bool
    windows: int


def bench_pipeline(rec: EegRecording, model, cfg: PipelineConfig, repeats: int = 3) -> PipelineBench:
    """Per-window end-to-end latency (features + predict + smoothing) of the streaming path."""
    if rec.duration_s < 60:
        raise ValueError("pipeline benchmark needs a recording of at least 60 s")
    offline = detect_offline(rec, model, cfg)
    per_window = []
    streamed = None
    for _ in range(repeats):
        out = []
        t_prev = time.perf_counter()
        for item in detect_stream(rec, model, cfg):
            if item[0] == "window":
                now = time.perf_counter()
                per_window.append(now - t_prev)
                out.append(item)
                t_prev = time.perf_counter()
        streamed = out
    matches = (
        len(streamed) == len(offline.starts)
        and all(s[2] == r and s[3] == m for s, r, m in zip(streamed, offline.raw, offline.smoothed))
        and np.allclose([s[4] for s in streamed], offline.scores, rtol=0, atol=1e-9)
    )
    lat = np.array(per_window) * 1e6
    median = float(np.median(lat))
    stride = cfg.window.stride_s
    realtime = median < stride * 1e6
    note = "" if realtime else f"latency {median:.0f} us exceeds the {stride} s stride"
    if note:
        log.warning(note)
    result = BenchResult(
        algorithm=getattr(model, "algorithm", "?"), batch=len(offline.starts), workers=1,
        median_us=median, p95_us=float(np.percentile(lat, 95)), speedup=1.0, repeats=repeats, note=note,
    )
    return PipelineBench(result, stride, realtime, bool(matches), len(offline.starts))


def results_to_csv(results: list[BenchResult]) -> str:
    out = io.StringIO()
    w = csv.DictWriter(out, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in results:
        w.writerow(r.row())
    return out.getvalue()


def format_table(results: list[BenchResult]) -> str:
    algos = list(dict.fromkeys(r.algorithm for r in results))
    one = {r.algorithm: r for r in results if r.workers == 1}
    best = {}
    for r in results:
        if r.algorithm not in best or r.workers > best[r.algorithm].workers:
            best[r.algorithm] = r
    lines = [f"{'Classifier':<26}" + "".join(f"{a:>12}" for a in algos)]
    lines.append(f"{'Time/inference [us]':<26}" + "".join(f"{one[a].median_us:>12.3f}" for a in algos))
    lines.append(f"{'p95 [us]':<26}" + "".join(f"{one[a].p95_us:>12.3f}" for a in algos))
    lines.append(
        f"{'Parallel speedup':<26}"
        + "".join(f"{best[a].speedup:>8.2f}x@{best[a].workers:<2}" for a in algos)
    )
    lines.append(f"{'Energy/inference [uJ]':<26}" + "".join(f"{'n/a':>12}" for a in algos))
    return "\n".join(lines)
