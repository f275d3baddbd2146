"""Full evaluation grid on a CHB-MIT download.

Both split modes, both channel sets, 2/4/8 s windows, with and without
smoothing, all four algorithms. The report text puts the published cells next
to each measured value where one exists. Expect hours of runtime on the full
corpus; ``--windows 8 --splits subject-specific`` is a quicker first pass.

    python3 scripts/run_table1.py /data/chb-mit -o runs/table1
"""

import argparse
import os
import time
from pathlib import Path

from szdetect.config import RunConfig, write_resolved
from szdetect.config import CorpusSection, EvaluationSection, FeatureSection, ModelSection
from szdetect.corpus import load_corpus
from szdetect.evaluation.scenario import run_scenario


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("corpus")
    p.add_argument("-o", "--out", default="runs/table1")
    p.add_argument("--splits", default="subject-specific,global")
    p.add_argument("--windows", default="2,4,8")
    p.add_argument("--algorithms", default="SVM,RF,ET,AB")
    p.add_argument("--exclude", default="", help="comma-separated subject ids to leave out")
    p.add_argument("--workers", type=int, default=os.cpu_count())
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    out = Path(args.out)
    if out.exists() and any(out.iterdir()):
        raise SystemExit(f"{out} is not empty")
    out.mkdir(parents=True, exist_ok=True)
    exclude = tuple(s for s in args.exclude.split(",") if s)
    corpus = load_corpus(args.corpus, exclude=exclude)
    print(f"{len(corpus)} recordings from {len(corpus.subjects)} subjects")

    tables = []
    for split in args.splits.split(","):
        cfg = RunConfig(
            corpus=CorpusSection(root=args.corpus, exclude=exclude),
            features=FeatureSection(channels=("all", "temporal"), windows=tuple(int(w) for w in args.windows.split(","))),
            model=ModelSection(algorithms=tuple(args.algorithms.split(","))),
            evaluation=EvaluationSection(split=split, smoothing=(False, True)),
            seed=args.seed,
            workers=args.workers,
            output=str(out),
        ).validate()
        t0 = time.perf_counter()
        report = run_scenario(corpus, cfg.scenario())
        name = split.replace("-", "_")
        (out / f"report_{name}.csv").write_text(report.to_csv(), encoding="utf-8", newline="\n")
        write_resolved(cfg, out, f"config_{name}.yaml")
        tables.append(report.table())
        print(report.table())
        print(f"{split}: {time.perf_counter() - t0:.0f} s")
    (out / "report.txt").write_text("\n\n".join(tables) + "\n", encoding="utf-8", newline="\n")


if __name__ == "__main__":
    main()
