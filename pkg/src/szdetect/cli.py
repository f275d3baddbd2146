"""``szdetect`` command line: convert, features, train, evaluate, detect, bench.

Exit codes: 0 ok, 1 data error, 2 config error, 3 missing input,
4 output conflict, 5 model/channel mismatch.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bench as benchmod
from .config import ConfigError, RunConfig, load_config, write_resolved
from .corpus import CorpusError, load_corpus
from .dwt import DwtError, features_from_csv, features_to_csv
from .edf import AnnotationError, ChannelError, EdfError, SummaryParseError, annotations_to_csv, parse_chbmit_summary, read_edf
from .evaluation.scenario import compute_corpus_features, corpus_index, run_scenario
from .evaluation.splits import make_split
from .models import DimensionError, ModelFormatError, TrainingError, load_model, save_model, train
from .pipeline import PipelineConfig, detect_stream
from .windower import WindowConfigError

log = logging.getLogger("szdetect")

EXIT_OK, EXIT_DATA, EXIT_CONFIG, EXIT_MISSING, EXIT_CONFLICT, EXIT_MISMATCH = range(6)


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _require_input(path: str | Path, what: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise CliError(f"{what} not found: {p}", EXIT_MISSING)
    return p


def _claim_file(path: str | Path, force: bool) -> Path:
    p = Path(path)
    if p.exists() and not force:
        raise CliError(f"{p} already exists (use --force to overwrite)", EXIT_CONFLICT)
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _claim_dir(path: str | Path, force: bool) -> Path:
    p = Path(path)
    if p.exists() and any(p.iterdir()) and not force:
        raise CliError(f"output directory {p} is not empty (use --force to overwrite)", EXIT_CONFLICT)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _config(args) -> RunConfig:
    if args.config is not None:
        _require_input(args.config, "config file")
    cfg = load_config(args.config)
    cfg = cfg.with_overrides(workers=getattr(args, "workers", None), output=getattr(args, "out", None))
    return cfg.validate()


def _corpus(cfg: RunConfig):
    return load_corpus(cfg.corpus.root, exclude=cfg.corpus.exclude)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_convert(args) -> int:
    src = _require_input(args.summary, "summary file")
    text = src.read_text(encoding="utf-8", errors="replace")
    try:
        annotations = parse_chbmit_summary(text)
    except SummaryParseError as exc:
        raise CliError(f"{src}: {exc}", EXIT_CONFIG) from None
    out = _claim_file(args.out, args.force)
    out.write_text(annotations_to_csv(annotations), encoding="utf-8", newline="\n")
    rows = sum(len(a.seizures) for a in annotations)
    print(f"{rows} seizure rows from {len(annotations)} files -> {out}")
    return EXIT_OK


def cmd_features(args) -> int:
    cfg = _config(args)
    corpus = _corpus(cfg)
    out = _claim_dir(cfg.output, args.force)
    feats, channel_map = compute_corpus_features(corpus, cfg.scenario())
    for (chan, win), per_rec in feats.items():
        ids, starts, labels, xs = [], [], [], []
        for rid, rf in per_rec.items():
            ids += [rid] * len(rf.starts)
            starts.append(rf.starts)
            labels.append(rf.labels)
            xs.append(rf.X)
        path = out / f"features_{chan}_{win}s.csv"
        path.write_text(
            features_to_csv(ids, np.concatenate(starts), np.concatenate(labels), np.concatenate(xs)),
            encoding="utf-8", newline="\n",
        )
        print(f"{sum(len(r.starts) for r in per_rec.values())} windows x {len(channel_map[chan])} channels -> {path}")
    write_resolved(cfg, out)
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _config(args)
    corpus = _corpus(cfg)
    if args.subject:
        corpus = type(corpus)([e for e in corpus if e.subject == args.subject])
        if not len(corpus):
            raise CliError(f"subject {args.subject!r} not found in corpus", EXIT_MISSING)
    scen = cfg.scenario()
    chan, win = scen.channel_sets[0], scen.windows[0]
    scen = replace(scen, channel_sets=(chan,), windows=(win,))
    model_path = _claim_file(args.model, args.force)
    feats, channel_map = compute_corpus_features(corpus, scen)
    per_rec = feats[(chan, win)]
    X = np.concatenate([r.X for r in per_rec.values()])
    y = np.concatenate([r.labels for r in per_rec.values()])
    tcfg = cfg.train_config(algorithm=args.algorithm)
    model = train(X, y, tcfg)
    pipe = cfg.pipeline(channel_map[chan], win)
    meta = {
        "pipeline": pipe.as_dict(),
        "channel_set": chan,
        "recordings": sorted(per_rec),
        "windows": int(len(y)),
        "positives": int(y.sum()),
    }
    save_model(model_path, model, config=tcfg.as_dict(), metadata=meta)
    write_resolved(cfg, model_path.parent, model_path.name + ".config.yaml")
    print(f"trained {tcfg.algorithm} on {len(y)} windows ({int(y.sum())} ictal) -> {model_path}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = _config(args)
    corpus = _corpus(cfg)
    scen = cfg.scenario()
    if args.dry_run:
        plan = make_split(corpus_index(corpus), scen.split, scen.seed)
        print(plan.describe())
        print(f"cells: {len(scen.channel_sets) * len(scen.windows) * len(scen.algorithms) * len(scen.weights) * len(scen.smoothing)}")
        return EXIT_OK
    out = _claim_dir(cfg.output, args.force)
    report = run_scenario(corpus, scen)
    (out / "report.csv").write_text(report.to_csv(), encoding="utf-8", newline="\n")
    table = report.table()
    (out / "report.txt").write_text(table + "\n", encoding="utf-8", newline="\n")
    write_resolved(cfg, out)
    print(table)
    print(f"report -> {out / 'report.csv'}")
    return EXIT_OK


def _pipeline_for(doc: dict) -> PipelineConfig:
    meta = doc.get("metadata", {})
    if "pipeline" not in meta:
        raise CliError("model file carries no channel/window settings; retrain it with `szdetect train`", EXIT_MISMATCH)
    return PipelineConfig.from_dict(meta["pipeline"])


def cmd_detect(args) -> int:
    model_path = _require_input(args.model, "model file")
    edf_path = _require_input(args.edf, "EDF file")
    model, doc = load_model(model_path)
    pipe = _pipeline_for(doc)
    rec = read_edf(edf_path)
    missing = [c for c in pipe.channels if c not in rec.labels]
    if missing:
        raise CliError(
            f"channel mismatch: model expects {', '.join(pipe.channels)}; "
            f"recording has {', '.join(rec.labels)} (missing {', '.join(missing)})",
            EXIT_MISMATCH,
        )
    stream = open(args.out, "w", encoding="utf-8", newline="\n") if args.out else sys.stdout
    try:
        for item in detect_stream(rec, model, pipe):
            if item[0] == "window":
                _, t, raw, sm, score = item
                line = {"type": "window", "t": t, "raw": raw, "smoothed": sm, "score": score}
            else:
                line = {"type": "event", "start_s": item[1].start_s, "end_s": item[1].end_s}
            stream.write(json.dumps(line) + "\n")
    finally:
        if stream is not sys.stdout:
            stream.close()
    return EXIT_OK


def cmd_bench(args) -> int:
    model_path = _require_input(args.model, "model file")
    model, doc = load_model(model_path)
    d = int(model.n_features)
    if args.features:
        _, _, _, X = features_from_csv(_require_input(args.features, "feature CSV").read_text(encoding="utf-8"))
        reps = -(-args.batch // len(X))
        X = np.tile(X, (reps, 1))[: max(args.batch, len(X))]
    else:
        X = np.random.default_rng(args.seed).standard_normal((args.batch, d))
    counts = tuple(int(c) for c in args.worker_counts.split(","))
    results = benchmod.bench_inference(model, X, counts, repeats=args.repeats)
    if args.edf:
        pipe = _pipeline_for(doc)
        pb = benchmod.bench_pipeline(read_edf(_require_input(args.edf, "EDF file")), model, pipe)
        print(
            f"pipeline: {pb.windows} windows, median {pb.result.median_us:.1f} us/window, "
            f"real-time {'yes' if pb.realtime else 'NO'}, matches offline {'yes' if pb.matches_offline else 'NO'}"
        )
    print(benchmod.format_table(results))
    if args.out:
        out = _claim_file(args.out, args.force)
        out.write_text(benchmod.results_to_csv(results), encoding="utf-8", newline="\n")
        settings = {"model": str(model_path), "batch": len(X), "features": args.features, "seed": args.seed,
                    "worker_counts": list(counts), "repeats": args.repeats}
        out.with_name(out.name + ".config.json").write_text(json.dumps(settings, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="szdetect", description="Wearable-EEG seizure detection pipeline")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True, out=True):
        if config:
            sp.add_argument("-c", "--config", help="YAML run configuration")
            sp.add_argument("--workers", type=int, help="parallel workers (default: all cores)")
        if out:
            sp.add_argument("-o", "--out", help="output directory (overrides config 'output')")
        sp.add_argument("--force", action="store_true", help="overwrite existing outputs")

    sp = sub.add_parser("convert", help="CHB-MIT summary text -> annotation CSV")
    sp.add_argument("summary")
    sp.add_argument("out")
    sp.add_argument("--force", action="store_true")
    sp.set_defaults(func=cmd_convert)

    sp = sub.add_parser("features", help="write per-window DWT feature CSVs")
    common(sp)
    sp.set_defaults(func=cmd_features)

    sp = sub.add_parser("train", help="train one model on a corpus (or one subject)")
    common(sp, out=False)
    sp.add_argument("model", help="output model file (JSON)")
    sp.add_argument("--algorithm", choices=("SVM", "RF", "ET", "AB"))
    sp.add_argument("--subject", help="train on this subject only")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("evaluate", help="run the configured scenario and write the report")
    common(sp)
    sp.add_argument("--dry-run", action="store_true", help="print the fold plan and exit")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("detect", help="stream window labels and alarm events as JSON lines")
    sp.add_argument("model")
    sp.add_argument("edf")
    sp.add_argument("-o", "--out", help="write JSON lines here instead of stdout")
    sp.set_defaults(func=cmd_detect)

    sp = sub.add_parser("bench", help="inference latency and worker speedup")
    sp.add_argument("model")
    sp.add_argument("--features", help="feature CSV to time (default: random batch)")
    sp.add_argument("--edf", help="also time the streaming pipeline on this recording")
    sp.add_argument("--batch", type=int, default=10_000)
    sp.add_argument("--worker-counts", default="1,2,4,8")
    sp.add_argument("--repeats", type=int, default=30)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("-o", "--out", help="results CSV")
    sp.add_argument("--force", action="store_true")
    sp.set_defaults(func=cmd_bench)
    return p


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, CliError):
        return exc.code
    if isinstance(exc, (ChannelError, DimensionError)):
        return EXIT_MISMATCH
    if isinstance(exc, (CorpusError, FileNotFoundError)):
        return EXIT_MISSING
    if isinstance(exc, (ConfigError, WindowConfigError, DwtError)):
        return EXIT_CONFIG
    if isinstance(exc, (EdfError, AnnotationError, ModelFormatError, TrainingError)):
        return EXIT_DATA
    return -1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Exception as exc:
        code = _exit_code(exc)
        if code < 0:
            raise
        print(f"szdetect {args.command}: error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
