"""Sweep the seizure-class weight ratio against the window length.

Prints window-level specificity and sensitivity for every algorithm at each
ratio and window length (subject-specific folds, temporal channels, no
smoothing) and writes the rows to CSV.

    python3 scripts/weight_sweep.py data/mini -o runs/weight_sweep.csv
"""

import argparse
from dataclasses import replace
from pathlib import Path

from szdetect.corpus import load_corpus
from szdetect.evaluation.scenario import ScenarioConfig, run_scenario
from szdetect.models import TrainConfig


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("corpus")
    p.add_argument("-o", "--out", default="runs/weight_sweep.csv")
    p.add_argument("--ratios", default="1,10,100")
    p.add_argument("--windows", default="2,4,8")
    p.add_argument("--algorithms", default="SVM,RF,ET,AB")
    p.add_argument("--channels", default="temporal", choices=("temporal", "all"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args()

    out = Path(args.out)
    if out.exists():
        raise SystemExit(f"{out} exists")
    corpus = load_corpus(args.corpus)
    cfg = ScenarioConfig(
        channel_sets=(args.channels,),
        windows=tuple(int(w) for w in args.windows.split(",")),
        algorithms=tuple(args.algorithms.split(",")),
        weights=tuple(float(r) for r in args.ratios.split(",")),
        smoothing=(False,),
        seed=args.seed,
        workers=args.workers,
    )
    cfg = replace(cfg, train=TrainConfig(seed=args.seed))
    report = run_scenario(corpus, cfg)

    print(f"{'algo':<5}{'window':>7}{'ratio':>7}{'spec %':>9}{'sens %':>9}")
    for r in sorted(report.rows, key=lambda r: (r.algorithm, r.window_s, float(r.weights.split(":")[-1]))):
        c = r.confusion
        print(f"{r.algorithm:<5}{r.window_s:>7g}{r.weights.split(':')[-1]:>7}{c.specificity:>9.2f}{c.sensitivity:>9.2f}")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(report.to_csv(), encoding="utf-8", newline="\n")
    print(f"-> {out}")


if __name__ == "__main__":
    main()
