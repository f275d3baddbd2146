"""Per-inference latency of the four classifiers on one shared feature set.

Trains every algorithm with default hyperparameters on the DWT features of a
corpus (temporal channels, 8 s windows), then times batch inference for each
worker count. Every timed configuration is first checked to reproduce the
sequential predictions exactly.

    python3 scripts/bench_table2.py data/mini -o runs/table2.csv
"""

import argparse
import os
from pathlib import Path

import numpy as np

from szdetect.bench import bench_inference, format_table, results_to_csv
from szdetect.corpus import load_corpus
from szdetect.evaluation.scenario import ScenarioConfig, compute_corpus_features
from szdetect.models import TrainConfig, train


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("corpus")
    p.add_argument("-o", "--out", default="runs/table2.csv")
    p.add_argument("--batch", type=int, default=10_000)
    p.add_argument("--worker-counts", default="1,2,4,8")
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    out = Path(args.out)
    if out.exists():
        raise SystemExit(f"{out} exists")
    corpus = load_corpus(args.corpus)
    feats, _ = compute_corpus_features(corpus, ScenarioConfig(channel_sets=("temporal",), windows=(8,)))
    per_rec = [rf for per in feats.values() for rf in per.values()]
    X = np.concatenate([rf.X for rf in per_rec])
    y = np.concatenate([rf.labels for rf in per_rec])
    print(f"{len(X)} windows x {X.shape[1]} features, {int(y.sum())} ictal")

    rng = np.random.default_rng(args.seed)
    batch = X[rng.integers(0, len(X), args.batch)]
    counts = tuple(int(c) for c in args.worker_counts.split(","))
    results = []
    for algo in ("SVM", "RF", "ET", "AB"):
        model = train(X, y, TrainConfig(algorithm=algo, seed=args.seed))
        extra = f", {len(model.support_vectors)} support vectors" if algo == "SVM" else ""
        print(f"{algo} trained{extra}")
        results += bench_inference(model, batch, counts, repeats=args.repeats)
    print(format_table(results))
    print(f"host CPUs: {os.cpu_count()}")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(results_to_csv(results), encoding="utf-8", newline="\n")
    print(f"-> {out}")


if __name__ == "__main__":
    main()
