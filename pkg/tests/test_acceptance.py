"""One test per primary acceptance criterion; each prints a single PASS/FAIL line."""

import os
import time
from pathlib import Path

import numpy as np
import pytest
import yaml

from helpers import hand_edf
from test_dwt import naive_multilevel
from test_metrics import brute_alarms, brute_event_scores, brute_window_metrics
from szdetect.bench import bench_inference
from szdetect.cli import main
from szdetect.corpus import load_corpus
from szdetect.dwt import DwtConfig, dwt_multilevel
from szdetect.edf import AnnotationSet, EdfError, SignalMeta, parse_edf, write_edf_bytes
from szdetect.evaluation.metrics import alarms_from_labels, event_scores, window_metrics
from szdetect.evaluation.scenario import ScenarioConfig, run_scenario
from szdetect.models import TrainConfig, train
from szdetect.postproc import SmoothConfig, smooth_labels
from szdetect.synth import make_mini_corpus


@pytest.fixture
def report(capsys):
    def emit(name, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} ({detail})")
        return ok

    return emit


def test_dwt_oracle(report):
    rng = np.random.default_rng(0)
    lengths = (512, 1024, 2048)
    worst, t0 = 0.0, time.perf_counter()
    signals = [rng.normal(0, 50, lengths[i % 3]) for i in range(1000)]
    for x in signals:
        for got, want in zip(dwt_multilevel(x), naive_multilevel(x)):
            worst = max(worst, float(np.max(np.abs(got - want))))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 10.0
    assert report("dwt-oracle", ok, f"max abs err {worst:.2e} over 1000 signals, {elapsed:.2f} s")


def test_dwt_conservation(report):
    rng = np.random.default_rng(1)
    worst = 0.0
    for name in ("haar", "db2", "db4"):
        for _ in range(50):
            x = rng.normal(size=2048)
            bands = dwt_multilevel(x, DwtConfig(wavelet=name, mode="periodic"))
            e = sum(float(np.sum(b * b)) for b in bands)
            worst = max(worst, abs(e - float(np.sum(x * x))) / float(np.sum(x * x)))
    ok = worst <= 1e-6
    assert report("dwt-conservation", ok, f"max relative energy error {worst:.2e}")


def test_edf_round_trip_and_fuzz(report):
    rng = np.random.default_rng(2)
    exact = 0
    for i in range(50):
        ns, spr, n_rec = int(rng.integers(1, 5)), int(rng.integers(1, 300)), int(rng.integers(1, 6))
        signals = [SignalMeta(f"S{k}", phys_min=-500.0, phys_max=500.0, samples_per_record=spr) for k in range(ns)]
        digital = rng.integers(-32768, 32768, (ns, spr * n_rec)).astype(np.int16)
        exact += np.array_equal(parse_edf(write_edf_bytes(signals, digital)).digital, digital)

    base = hand_edf(["F7-T7", "T7-P7"], 8, [[list(range(8)), list(range(8, 16))]] * 3)
    header_len = 256 * 3
    crashes = []
    for _ in range(10_000):
        raw = bytearray(base)
        for _ in range(int(rng.integers(1, 6))):
            pos = int(rng.integers(0, header_len))
            patch = rng.integers(0, 256, int(rng.integers(1, 9)), dtype=np.uint8).tobytes()
            raw[pos:pos + len(patch)] = patch
        try:
            parse_edf(bytes(raw))
        except EdfError:
            pass
        except Exception as exc:  # noqa: BLE001
            crashes.append(repr(exc))
    ok = exact == 50 and not crashes
    assert report("edf-round-trip", ok, f"{exact}/50 exact round trips, {len(crashes)} crashes in 10^4 mutated headers")


def _separable(n=200, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1, 1, (20 * n, 2))
    m = X[:, 0] + 0.5 * X[:, 1]
    keep = np.abs(m) > 0.1
    return X[keep][:n], (m[keep][:n] > 0).astype(np.int8)


def _blobs(n, seed):
    rng = np.random.default_rng(seed)
    y = (rng.random(n) < 0.5).astype(np.int8)
    return rng.normal(size=(n, 2)) + np.where(y[:, None] == 1, 3.0, 0.0), y


def test_classifier_sanity(report):
    X, y = _separable()
    Xb, yb = _blobs(400, 1)
    Xt, yt = _blobs(2000, 2)
    t0 = time.perf_counter()
    details, ok = [], True
    for algo in ("SVM", "RF", "ET", "AB"):
        cfg = TrainConfig(algorithm=algo, seed=0)
        train_acc = float(np.mean(train(X, y, cfg).predict(X)[0] == y))
        held = float(np.mean(train(Xb, yb, cfg).predict(Xt)[0] == yt))
        ok &= train_acc == 1.0 and held >= 0.95
        details.append(f"{algo} {100 * train_acc:.1f}%/{100 * held:.1f}%")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30.0
    assert report("classifier-sanity", ok, ", ".join(details) + f" (separable train / blobs held-out), {elapsed:.1f} s")


def _overlapping(n, seed):
    rng = np.random.default_rng(seed)
    y = (rng.random(n) < 0.2).astype(np.int8)
    return rng.normal(size=(n, 2)) + np.where(y[:, None] == 1, 1.0, 0.0), y


def test_weight_ratio_trend(report):
    Xtr, ytr = _overlapping(1000, 0)
    Xte, yte = _overlapping(4000, 1)
    details, ok = [], True
    for algo in ("SVM", "RF", "ET", "AB"):
        spec, sens = [], []
        for r in (1, 10, 100):
            model = train(Xtr, ytr, TrainConfig(algorithm=algo, weights=r, seed=0))
            s, e = window_metrics(model.predict(Xte)[0], yte)
            spec.append(s)
            sens.append(e)
        good = all(np.diff(sens) >= 0) and all(np.diff(spec) <= 0)
        ok &= good
        trail = " ".join(f"{s:.1f}/{e:.1f}" for s, e in zip(spec, sens))
        details.append(f"{algo} {'ok' if good else 'NOT monotone'} [{trail}]")
    assert report("weight-ratio-trend", ok, "spec/sens at r=1,10,100: " + "; ".join(details))


def test_smoothing_suppression(report):
    rng = np.random.default_rng(3)
    n = 100_000
    truth = np.zeros(n, dtype=np.int8)
    seizures = []
    for start in range(500, n - 500, 2000):
        length = int(rng.integers(5, 31))
        truth[start:start + length] = 1
        seizures.append((float(start), float(start + length)))
    noise = (rng.random(n) < 0.02).astype(np.int8)
    raw = np.maximum(noise, truth)
    smooth = smooth_labels(raw, SmoothConfig(3))
    starts = np.arange(n, dtype=float)
    ann = AnnotationSet("stream", tuple(seizures))

    def false_events(labels):
        events = alarms_from_labels(labels, starts, 1.0)
        return sum(not any(e.overlaps(a, b) for a, b in seizures) for e in events), events

    raw_fp, _ = false_events(raw)
    smooth_fp, events = false_events(smooth)
    sens, _ = event_scores(events, ann, n / 3600)
    ratio = smooth_fp / raw_fp
    ok = ratio <= 0.05 and sens == 100.0
    assert report(
        "smoothing-suppression", ok,
        f"FP events {raw_fp} raw -> {smooth_fp} smoothed ({100 * ratio:.2f}%), event sensitivity {sens:.0f}% over {len(seizures)} runs",
    )


def test_metric_oracles(report):
    rng = np.random.default_rng(4)
    mismatches = 0
    for _ in range(1000):
        n = int(rng.integers(1, 60))
        length = float(rng.choice([2, 4, 8]))
        pred = (rng.random(n) < rng.random()).astype(np.int8)
        truth = (rng.random(n) < rng.random()).astype(np.int8)
        starts = np.arange(n) * length
        mismatches += window_metrics(pred, truth) != brute_window_metrics(pred, truth)
        events = alarms_from_labels(pred, starts, length)
        mismatches += [(e.start_s, e.end_s) for e in events] != brute_alarms(pred, starts, length)
        total = n * length
        seizures, t = [], 0.0
        while True:
            t += float(rng.uniform(0, total / 2))
            span = float(rng.uniform(1, total / 4 + 1))
            if t + span > total:
                break
            seizures.append((t, t + span))
            t += span
        hours = total / 3600
        got = event_scores(events, AnnotationSet("r", tuple(seizures)), hours)
        mismatches += got != brute_event_scores([(e.start_s, e.end_s) for e in events], seizures, hours)
    assert report("metric-oracles", mismatches == 0, f"{mismatches} mismatches in 1000 random cases x 3 functions")


def test_end_to_end_synthetic(tmp_path, report):
    t0 = time.perf_counter()
    make_mini_corpus(tmp_path / "corpus")
    corpus = load_corpus(tmp_path / "corpus")
    cfg = ScenarioConfig(
        split="subject-specific", channel_sets=("temporal",), windows=(8,), algorithms=("RF", "ET", "AB"), smoothing=(True,)
    )
    rows = run_scenario(corpus, cfg).rows
    elapsed = time.perf_counter() - t0
    ok = len(rows) == 3 and elapsed < 300
    details = []
    for r in rows:
        ok &= r.events.sensitivity == 100.0 and r.events.fp_per_hour == 0.0
        details.append(f"{r.algorithm} sens {r.events.sensitivity:.0f}% FP/h {r.events.fp_per_hour:.2f}")
    assert report("end-to-end-synthetic", ok, ", ".join(details) + f", {len(corpus.subjects)} subjects, {elapsed:.1f} s")


@pytest.fixture(scope="module")
def bench_models():
    """Default-hyperparameter models trained on one shared 80-dimensional feature set."""
    rng = np.random.default_rng(5)
    n, d = 2000, 80
    y = (rng.random(n) < 0.3).astype(np.int8)
    X = rng.normal(size=(n, d)) + np.where(y[:, None] == 1, 0.15, 0.0)
    models = {a: train(X, y, TrainConfig(algorithm=a, seed=0)) for a in ("SVM", "RF", "ET", "AB")}
    return models, d


def test_benchmark_ordering(bench_models, report):
    models, d = bench_models
    X = np.random.default_rng(6).normal(size=(10_000, d))
    med = {a: bench_inference(m, X, worker_counts=(1,), repeats=5, warmup=1)[0].median_us for a, m in models.items()}
    n_sv = len(models["SVM"].support_vectors)
    ok = max(med["RF"], med["ET"]) < med["AB"] < med["SVM"] and n_sv >= 500
    detail = ", ".join(f"{a} {v:.2f} us" for a, v in med.items())
    assert report("benchmark-ordering", ok, f"median per inference: {detail}; SVM has {n_sv} support vectors")


def test_tree_ensemble_speedup(bench_models, report):
    models, d = bench_models
    X = np.random.default_rng(7).normal(size=(100_000, d))
    res = bench_inference(models["RF"], X, worker_counts=(1, 8), repeats=3, warmup=1)
    speed = next(r.speedup for r in res if r.workers == 8)
    ok = speed >= 3.0
    assert report("tree-speedup", ok, f"RF 8-worker speedup {speed:.2f}x on batch 10^5, host has {os.cpu_count()} CPU(s)")


def test_reproducible_reports(tmp_path, mini_corpus, report):
    root, _ = mini_corpus
    cfg = {
        "corpus": {"root": str(root)},
        "features": {"channels": ["temporal"], "windows": [8]},
        "model": {"algorithms": ["RF", "AB"]},
        "seed": 0,
    }
    path = tmp_path / "c.yaml"
    path.write_text(yaml.safe_dump(cfg))
    assert main(["evaluate", "-c", str(path), "-o", str(tmp_path / "a")]) == 0
    assert main(["evaluate", "-c", str(path), "-o", str(tmp_path / "b")]) == 0
    a, b = (tmp_path / "a" / "report.csv").read_bytes(), (tmp_path / "b" / "report.csv").read_bytes()
    assert report("reproducibility", a == b, f"two report CSVs of {len(a)} bytes {'identical' if a == b else 'differ'}")


CHBMIT = os.environ.get("SZDETECT_CHBMIT")


@pytest.mark.skipif(not CHBMIT, reason="set SZDETECT_CHBMIT to a CHB-MIT directory to run")
def test_real_data_report(tmp_path, report):
    path = tmp_path / "c.yaml"
    path.write_text(yaml.safe_dump({"corpus": {"root": CHBMIT}, "features": {"channels": ["temporal"], "windows": [8]}}))
    code = main(["evaluate", "-c", str(path), "-o", str(tmp_path / "run")])
    text = (tmp_path / "run" / "report.txt").read_text() if code == 0 else ""
    ok = code == 0 and "reference" in text
    assert report("real-data", ok, f"exit {code}, report at {Path(tmp_path / 'run')}")
