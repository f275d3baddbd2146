import json
import shutil

import numpy as np
import pytest
import yaml

from szdetect.cli import main
from szdetect.edf import write_edf
from szdetect.synth import IctalPattern, synth_recording

TEMPORAL = ["F7-T7", "T7-P7", "F8-T8", "T8-P8"]


def write_config(path, root, out, **model):
    cfg = {
        "corpus": {"root": str(root)},
        "features": {"channels": ["temporal"], "windows": [8]},
        "model": {"algorithms": ["AB"], **model},
        "evaluation": {"split": "subject-specific", "smoothing": [True]},
        "seed": 0,
        "workers": 1,
        "output": str(out),
    }
    path.write_text(yaml.safe_dump(cfg))
    return path


SUMMARY = """File Name: chb05_01.edf
Number of Seizures in File: 1
Seizure Start Time: 417 seconds
Seizure End Time: 532 seconds

File Name: chb05_02.edf
Number of Seizures in File: 0

File Name: chb05_03.edf
Number of Seizures in File: 1
Seizure Start Time: 1086 seconds
Seizure End Time: 1196 seconds
"""


def test_convert(tmp_path, capsys):
    src = tmp_path / "s.txt"
    src.write_text(SUMMARY)
    assert main(["convert", str(src), str(tmp_path / "a.csv")]) == 0
    lines = (tmp_path / "a.csv").read_text().splitlines()
    assert lines == ["recording_id,start_s,end_s", "chb05_01,417.0,532.0", "chb05_03,1086.0,1196.0"]
    assert "2 seizure rows" in capsys.readouterr().out
    assert main(["convert", str(src), str(tmp_path / "a.csv")]) == 4


def test_convert_zero_seizures(tmp_path):
    src = tmp_path / "s.txt"
    src.write_text("File Name: x.edf\nNumber of Seizures in File: 0\n")
    assert main(["convert", str(src), str(tmp_path / "z.csv")]) == 0
    assert (tmp_path / "z.csv").read_text() == "recording_id,start_s,end_s\n"


def test_convert_malformed_line(tmp_path, capsys):
    src = tmp_path / "s.txt"
    src.write_text("File Name: x.edf\nNumber of Seizures in File: 1\nSeizure Start Time: ten seconds\nSeizure End Time: 5 seconds\n")
    assert main(["convert", str(src), str(tmp_path / "m.csv")]) == 2
    err = capsys.readouterr().err
    assert "line 3" in err and "ten seconds" in err
    assert not (tmp_path / "m.csv").exists()


def test_convert_missing_input(tmp_path):
    assert main(["convert", str(tmp_path / "nope.txt"), str(tmp_path / "o.csv")]) == 3


def test_evaluate_one_row(tmp_path, mini_corpus, capsys):
    root, _ = mini_corpus
    out = tmp_path / "run"
    cfg = write_config(tmp_path / "c.yaml", root, out)
    assert main(["evaluate", "-c", str(cfg)]) == 0
    lines = (out / "report.csv").read_text().splitlines()
    assert len(lines) == 2
    row = dict(zip(lines[0].split(","), lines[1].split(",")))
    for key, value in row.items():
        if key != "flagged":
            assert value != "", key
    assert row["algorithm"] == "AB" and row["channels"] == "temporal" and row["smoothing"] == "on"
    resolved = yaml.safe_load((out / "config.yaml").read_text())
    assert resolved["model"]["algorithms"] == ["AB"]
    assert "Specificity" in capsys.readouterr().out
    # same output directory again
    assert main(["evaluate", "-c", str(cfg)]) == 4
    assert main(["evaluate", "-c", str(cfg), "--force"]) == 0


def test_evaluate_dry_run(tmp_path, mini_corpus, capsys):
    root, _ = mini_corpus
    out = tmp_path / "dry"
    cfg = write_config(tmp_path / "c.yaml", root, out)
    assert main(["evaluate", "-c", str(cfg), "--dry-run"]) == 0
    text = capsys.readouterr().out
    assert "12 folds" in text and "chb01/chb01_01" in text
    assert not out.exists()


def test_evaluate_config_errors(tmp_path, mini_corpus):
    root, _ = mini_corpus
    bad = tmp_path / "bad.yaml"
    bad.write_text("model:\n  algorithm: RF\n")
    assert main(["evaluate", "-c", str(bad)]) == 2
    assert main(["evaluate", "-c", str(tmp_path / "missing.yaml")]) == 3
    cfg = write_config(tmp_path / "c.yaml", tmp_path / "no-corpus", tmp_path / "o")
    assert main(["evaluate", "-c", str(cfg)]) == 3


def test_evaluate_reproducible(tmp_path, mini_corpus):
    root, _ = mini_corpus
    cfg = write_config(tmp_path / "c.yaml", root, tmp_path / "a", n_rounds=10)
    assert main(["evaluate", "-c", str(cfg)]) == 0
    assert main(["evaluate", "-c", str(cfg), "-o", str(tmp_path / "b"), "--workers", "3"]) == 0
    assert (tmp_path / "a" / "report.csv").read_bytes() == (tmp_path / "b" / "report.csv").read_bytes()


def test_features_command(tmp_path, mini_corpus):
    root, _ = mini_corpus
    cfg = write_config(tmp_path / "c.yaml", root, tmp_path / "f")
    assert main(["features", "-c", str(cfg)]) == 0
    text = (tmp_path / "f" / "features_temporal_8s.csv").read_text().splitlines()
    assert len(text) == 1 + 16 * 37
    assert len(text[0].split(",")) == 3 + 80
    assert (tmp_path / "f" / "config.yaml").exists()


@pytest.fixture(scope="module")
def detect_setup(tmp_path_factory):
    """One subject with a fixed ictal signature; model trained through the CLI."""
    root = tmp_path_factory.mktemp("det")
    pattern = IctalPattern(band_hz=(3.0, 7.0), amplitude_uv=220.0)
    sdir = root / "corpus" / "s01"
    sdir.mkdir(parents=True)
    rows = ["recording_id,start_s,end_s"]
    for i, seiz in enumerate([[(60, 120)], [(150, 200)], [(30, 80)], []]):
        rid = f"s01_{i}"
        write_edf(sdir / f"{rid}.edf", synth_recording(rid, 240, seiz, seed=100 + i, labels=TEMPORAL, pattern=pattern))
        rows += [f"{rid},{a},{b}" for a, b in seiz]
    (sdir / "annotations.csv").write_text("\n".join(rows) + "\n")
    cfg = write_config(root / "c.yaml", root / "corpus", root / "out", n_rounds=20)
    model = root / "ab.json"
    assert main(["train", "-c", str(cfg), str(model)]) == 0
    assert (root / "ab.json.config.yaml").exists()
    new = root / "new.edf"
    write_edf(new, synth_recording("new", 240, [(100, 150)], seed=7, labels=TEMPORAL, pattern=pattern))
    quiet = root / "quiet.edf"
    write_edf(quiet, synth_recording("quiet", 240, [], seed=8, labels=TEMPORAL, pattern=pattern))
    return root, model, new, quiet


def _lines(capsys):
    return [json.loads(line) for line in capsys.readouterr().out.splitlines()]


def test_detect_one_event(detect_setup, capsys):
    root, model, new, _ = detect_setup
    assert main(["detect", str(model), str(new)]) == 0
    lines = _lines(capsys)
    windows = [l for l in lines if l["type"] == "window"]
    events = [l for l in lines if l["type"] == "event"]
    assert len(windows) == 30
    assert set(windows[0]) == {"type", "t", "raw", "smoothed", "score"}
    assert len(events) == 1
    assert events[0]["start_s"] < 150 and events[0]["end_s"] > 100


def test_detect_is_deterministic(detect_setup, tmp_path):
    root, model, new, _ = detect_setup
    assert main(["detect", str(model), str(new), "-o", str(tmp_path / "a.jsonl")]) == 0
    assert main(["detect", str(model), str(new), "-o", str(tmp_path / "b.jsonl")]) == 0
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()


def test_detect_quiet_recording(detect_setup, capsys):
    root, model, _, quiet = detect_setup
    assert main(["detect", str(model), str(quiet)]) == 0
    lines = _lines(capsys)
    assert lines and all(l["type"] == "window" for l in lines)


def test_detect_truncated_edf(detect_setup, tmp_path, capsys):
    root, model, new, _ = detect_setup
    bad = tmp_path / "t.edf"
    bad.write_bytes(new.read_bytes()[:-1000])
    assert main(["detect", str(model), str(bad)]) == 1
    assert "truncated" in capsys.readouterr().err


def test_detect_channel_mismatch(detect_setup, tmp_path, capsys):
    root, model, _, _ = detect_setup
    other = tmp_path / "o.edf"
    write_edf(other, synth_recording("o", 64, labels=["FP1-F7", "F7-T7", "C3-P3"]))
    assert main(["detect", str(model), str(other)]) == 5
    err = capsys.readouterr().err
    assert "T7-P7" in err and "C3-P3" in err


def test_bench_command(detect_setup, tmp_path, capsys):
    root, model, new, _ = detect_setup
    out = tmp_path / "b.csv"
    assert main(["bench", str(model), "--batch", "1000", "--repeats", "2", "--worker-counts", "1,2", "--edf", str(new), "-o", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0].startswith("algorithm,batch,workers,median_us,p95_us,speedup")
    assert len(rows) == 3
    text = capsys.readouterr().out
    assert "matches offline yes" in text
    assert (tmp_path / "b.csv.config.json").exists()


def test_train_output_conflict(detect_setup):
    root, model, _, _ = detect_setup
    assert main(["train", "-c", str(root / "c.yaml"), str(model)]) == 4
