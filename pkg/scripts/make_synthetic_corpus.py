"""Write a small CHB-MIT-shaped corpus of synthetic EDF recordings.

Each subject gets its own band-limited ictal burst pattern on top of pink
background noise, plus a summary text in the CHB-MIT format.

    python3 scripts/make_synthetic_corpus.py data/mini --subjects 4
"""

import argparse
from pathlib import Path

from szdetect.synth import make_mini_corpus


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("root")
    p.add_argument("--subjects", type=int, default=4)
    p.add_argument("--seizure-recordings", type=int, default=3)
    p.add_argument("--quiet-recordings", type=int, default=1)
    p.add_argument("--duration", type=int, default=300, help="seconds per recording")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    root = Path(args.root)
    if root.exists() and any(root.iterdir()):
        raise SystemExit(f"{root} is not empty")
    anns = make_mini_corpus(
        root,
        n_subjects=args.subjects,
        seizure_recordings=args.seizure_recordings,
        quiet_recordings=args.quiet_recordings,
        duration_s=args.duration,
        seed=args.seed,
    )
    n_seiz = sum(len(a.seizures) for a in anns.values())
    print(f"{len(anns)} recordings, {n_seiz} seizures -> {root}")


if __name__ == "__main__":
    main()
