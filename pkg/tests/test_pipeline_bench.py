import numpy as np
import pytest

from szdetect.bench import (
    BENCH_COLUMNS,
    BenchCorrectnessError,
    bench_inference,
    bench_pipeline,
    format_table,
    results_to_csv,
)
from szdetect.edf import AnnotationSet
from szdetect.models import ClassWeights, TrainConfig, TreeEnsembleModel, build_tree, train
from szdetect.pipeline import PipelineConfig, detect_offline, detect_stream, prepare
from szdetect.synth import synth_recording
from szdetect.windower import WindowConfig, segment_array
from szdetect.dwt import extract_features_batch

TEMPORAL = ("F7-T7", "T7-P7", "F8-T8", "T8-P8")


@pytest.fixture(scope="module")
def trained():
    cfg = PipelineConfig(window=WindowConfig(8))
    Xs, ys = [], []
    for i, seiz in enumerate([[(40, 90)], [(100, 150)], []]):
        rec = synth_recording(f"t{i}", 200, seiz, seed=i)
        w, _, y = segment_array(prepare(rec, cfg), AnnotationSet(f"t{i}", tuple(seiz)), cfg.window)
        Xs.append(extract_features_batch(w))
        ys.append(y)
    model = train(np.concatenate(Xs), np.concatenate(ys), TrainConfig("RF", n_trees=20))
    return model, cfg


def test_offline_and_stream_agree(trained):
    model, cfg = trained
    rec = synth_recording("new", 240, [(100, 160)], seed=11)
    off = detect_offline(rec, model, cfg)
    items = list(detect_stream(rec, model, cfg))
    windows = [i for i in items if i[0] == "window"]
    events = [i[1] for i in items if i[0] == "event"]
    assert [w[1] for w in windows] == off.starts.tolist()
    assert [w[2] for w in windows] == off.raw.tolist()
    assert [w[3] for w in windows] == off.smoothed.tolist()
    assert [w[4] for w in windows] == off.scores.tolist()
    assert events == off.events
    assert len(events) == 1 and events[0].overlaps(100, 160)


def test_pipeline_config_round_trip():
    cfg = PipelineConfig(channels=("A", "B"), window=WindowConfig(4, 2), smooth_k=5)
    assert PipelineConfig.from_dict(cfg.as_dict()) == cfg


def _batch(d, n=1000, seed=0):
    return np.random.default_rng(seed).normal(size=(n, d))


def test_single_worker_speedup_is_one(trained):
    model, _ = trained
    res = bench_inference(model, _batch(80), worker_counts=(1,), repeats=3)
    assert len(res) == 1 and res[0].speedup == 1.0 and res[0].median_us > 0 and res[0].p95_us >= res[0].median_us


def test_results_cover_requested_workers(trained):
    model, _ = trained
    res = bench_inference(model, _batch(80, 1500), worker_counts=(1, 2, 3), repeats=3)
    assert [r.workers for r in res] == [1, 2, 3]
    assert all(r.batch == 1500 for r in res)
    csv = results_to_csv(res)
    assert csv.splitlines()[0] == ",".join(BENCH_COLUMNS)
    assert "Time/inference" in format_table(res)


def test_small_batch_rejected(trained):
    model, _ = trained
    with pytest.raises(ValueError, match="1000"):
        bench_inference(model, _batch(80, 999))


class BatchDependent:
    algorithm = "odd"

    def predict(self, X):
        s = np.full(len(X), float(len(X)))
        return (s > 0).astype(np.int8), s


def test_mismatch_refuses_to_report():
    with pytest.raises(BenchCorrectnessError):
        bench_inference(BatchDependent(), _batch(3), worker_counts=(1, 2), repeats=1)


@pytest.mark.parametrize("algo", ["SVM", "RF", "ET", "AB"])
def test_worker_counts_do_not_change_predictions(algo):
    rng = np.random.default_rng(1)
    y = (rng.random(400) < 0.3).astype(int)
    X = rng.normal(size=(400, 10)) + 0.5 * y[:, None]
    model = train(X, y, TrainConfig(algo, n_trees=10))
    res = bench_inference(model, _batch(10, 2000), worker_counts=(1, 2, 4, 8), repeats=1, warmup=0)
    assert len(res) == 4


def test_depth_one_stumps():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(100, 3))
    y = (X[:, 0] > 0).astype(int)
    stump = build_tree(X, y, np.ones(100), max_depth=1)
    model = TreeEnsembleModel([stump], "RF", n_features=3)
    res = bench_inference(model, _batch(3), worker_counts=(1,), repeats=3)
    assert res[0].median_us > 0


def test_pipeline_latency_well_below_stride(trained):
    model, cfg = trained
    rec = synth_recording("p", 120, [(40, 80)], seed=12)
    pb = bench_pipeline(rec, model, cfg, repeats=2)
    assert pb.matches_offline and pb.realtime and pb.windows == 15
    assert pb.result.median_us < 8e6 / 100


def test_pipeline_bench_needs_a_minute(trained):
    model, cfg = trained
    with pytest.raises(ValueError):
        bench_pipeline(synth_recording("s", 40, seed=1), model, cfg)
