"""EDF reading/writing and CHB-MIT seizure summary parsing.

Only plain EDF (16-bit) is handled. Samples are returned in physical units.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

HEADER_BYTES = 256
SIGNAL_HEADER_BYTES = 256

# (name, width) in file order
_GLOBAL_FIELDS = (
    ("version", 8),
    ("patient", 80),
    ("recording", 80),
    ("startdate", 8),
    ("starttime", 8),
    ("header_bytes", 8),
    ("reserved", 44),
    ("record_count", 8),
    ("record_duration", 8),
    ("signal_count", 4),
)
_SIGNAL_FIELDS = (
    ("label", 16),
    ("transducer", 80),
    ("physical_dim", 8),
    ("phys_min", 8),
    ("phys_max", 8),
    ("dig_min", 8),
    ("dig_max", 8),
    ("prefiltering", 80),
    ("samples_per_record", 8),
    ("reserved", 32),
)

TEMPORAL_CHANNELS = ("F7-T7", "T7-P7", "F8-T8", "T8-P8")

# CHB-MIT 23-channel bipolar montage; "T8-P8" occurs twice (identical data) in the real files.
CHBMIT_CHANNELS = (
    "FP1-F7", "F7-T7", "T7-P7", "P7-O1",
    "FP1-F3", "F3-C3", "C3-P3", "P3-O1",
    "FP2-F4", "F4-C4", "C4-P4", "P4-O2",
    "FP2-F8", "F8-T8", "T8-P8", "P8-O2",
    "FZ-CZ", "CZ-PZ", "P7-T7", "T7-FT9",
    "FT9-FT10", "FT10-T8", "T8-P8",
)


class EdfError(ValueError):
    """Base class for EDF problems."""


class EdfParseError(EdfError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class EdfFieldError(EdfError):
    def __init__(self, field: str, raw: bytes, offset: int):
        super().__init__(f"header field {field!r} at byte offset {offset} is not valid: {raw!r}")
        self.field = field
        self.raw = raw
        self.offset = offset


class CalibrationError(EdfError):
    pass


class ChannelError(KeyError):
    def __str__(self) -> str:
        return str(self.args[0])


class AnnotationError(ValueError):
    pass


@dataclass(frozen=True)
class SignalMeta:
    label: str
    physical_dim: str = "uV"
    phys_min: float = -3200.0
    phys_max: float = 3200.0
    dig_min: int = -32768
    dig_max: int = 32767
    samples_per_record: int = 256
    transducer: str = ""
    prefiltering: str = ""

    def __post_init__(self):
        if not self.phys_max > self.phys_min:
            raise CalibrationError(
                f"signal {self.label!r}: phys_max ({self.phys_max}) must exceed phys_min ({self.phys_min})"
            )
        if not self.dig_max > self.dig_min:
            raise CalibrationError(
                f"signal {self.label!r}: dig_max ({self.dig_max}) must exceed dig_min ({self.dig_min})"
            )
        if self.samples_per_record < 1:
            raise EdfError(f"signal {self.label!r}: samples_per_record must be >= 1")

    @property
    def gain(self) -> float:
        return (self.phys_max - self.phys_min) / (self.dig_max - self.dig_min)

    def to_physical(self, digital: np.ndarray) -> np.ndarray:
        digital = np.asarray(digital, dtype=np.float64)
        return self.phys_min + (digital - self.dig_min) * self.gain

    def to_digital(self, physical: np.ndarray) -> np.ndarray:
        physical = np.asarray(physical, dtype=np.float64)
        dig = np.rint((physical - self.phys_min) / self.gain + self.dig_min)
        return np.clip(dig, self.dig_min, self.dig_max).astype(np.int16)


@dataclass(frozen=True)
class RecordingMeta:
    recording_id: str
    start: dt.datetime = dt.datetime(2000, 1, 1)
    record_count: int = 0
    record_duration_s: Fraction = Fraction(1)
    signal_count: int = 1
    patient: str = "X X X X"
    recording: str = ""

    @property
    def duration_s(self) -> float:
        return float(self.record_count * self.record_duration_s)


@dataclass
class EegRecording:
    meta: RecordingMeta
    signals: list[SignalMeta]
    data: np.ndarray  # (channels, samples), physical units
    digital: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2 or self.data.shape[0] != len(self.signals):
            raise EdfError(
                f"data shape {self.data.shape} does not match {len(self.signals)} signals"
            )

    @property
    def recording_id(self) -> str:
        return self.meta.recording_id

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.signals]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def sampling_rate(self) -> float:
        rates = {float(s.samples_per_record / self.meta.record_duration_s) for s in self.signals}
        if len(rates) != 1:
            raise EdfError(f"mixed sampling rates are not supported: {sorted(rates)}")
        return rates.pop()

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sampling_rate


@dataclass(frozen=True)
class AnnotationSet:
    recording_id: str
    seizures: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        ivs = tuple(sorted((float(a), float(b)) for a, b in self.seizures))
        for a, b in ivs:
            if not (0 <= a < b):
                raise AnnotationError(f"{self.recording_id}: invalid seizure interval [{a}, {b}]")
        for (_, b0), (a1, _) in zip(ivs, ivs[1:]):
            if a1 < b0:
                raise AnnotationError(f"{self.recording_id}: overlapping seizure intervals")
        object.__setattr__(self, "seizures", ivs)

    def check_within(self, duration_s: float) -> None:
        for a, b in self.seizures:
            if b > duration_s + 1e-9:
                raise AnnotationError(
                    f"{self.recording_id}: seizure [{a}, {b}] ends after recording ({duration_s} s)"
                )


# ---------------------------------------------------------------------------
# EDF parsing
# ---------------------------------------------------------------------------


def _ascii(raw: bytes) -> str:
    return raw.decode("ascii", errors="replace").rstrip(" \x00")


def _number(raw: bytes, name: str, offset: int, kind=float):
    text = raw.decode("ascii", errors="strict") if raw.isascii() else None
    if text is None:
        raise EdfFieldError(name, raw, offset)
    text = text.strip()
    try:
        if kind is int:
            return int(text)
        if kind is Fraction:
            value = Fraction(text)
        else:
            value = float(text)
    except (ValueError, ZeroDivisionError):
        raise EdfFieldError(name, raw, offset) from None
    if kind is float and not np.isfinite(value):
        raise EdfFieldError(name, raw, offset)
    return value


def _parse_start(date: str, time: str) -> dt.datetime:
    try:
        day, month, year = (int(p) for p in date.split("."))
        hh, mm, ss = (int(p) for p in time.replace(":", ".").split("."))
        year += 2000 if year < 85 else 1900
        return dt.datetime(year, month, day, hh, mm, ss)
    except ValueError:
        return dt.datetime(1985, 1, 1)


def parse_edf(raw: bytes, recording_id: str | None = None) -> EegRecording:
    """Parse an EDF byte string.

    Raises an :class:`EdfError` subclass for every malformed input.
    """
    buf = memoryview(raw)
    if len(buf) < HEADER_BYTES:
        raise EdfParseError(f"truncated global header: {len(buf)} of {HEADER_BYTES} bytes", len(buf))

    fields: dict[str, bytes] = {}
    offsets: dict[str, int] = {}
    pos = 0
    for name, width in _GLOBAL_FIELDS:
        fields[name] = bytes(buf[pos:pos + width])
        offsets[name] = pos
        pos += width

    ns = _number(fields["signal_count"], "signal_count", offsets["signal_count"], int)
    if ns < 1:
        raise EdfFieldError("signal_count", fields["signal_count"], offsets["signal_count"])
    n_records = _number(fields["record_count"], "record_count", offsets["record_count"], int)
    if n_records < 0:
        raise EdfFieldError("record_count", fields["record_count"], offsets["record_count"])
    duration = _number(fields["record_duration"], "record_duration", offsets["record_duration"], Fraction)
    if not 0 < duration <= 10**6:
        raise EdfFieldError("record_duration", fields["record_duration"], offsets["record_duration"])

    header_len = HEADER_BYTES + SIGNAL_HEADER_BYTES * ns
    if len(buf) < header_len:
        raise EdfParseError(
            f"truncated signal headers: need {header_len} bytes for {ns} signals, have {len(buf)}",
            len(buf),
        )

    per_signal: dict[str, list[tuple[bytes, int]]] = {}
    pos = HEADER_BYTES
    for name, width in _SIGNAL_FIELDS:
        per_signal[name] = []
        for _ in range(ns):
            per_signal[name].append((bytes(buf[pos:pos + width]), pos))
            pos += width

    signals = []
    for i in range(ns):
        def num(name, kind=float):
            value, off = per_signal[name][i]
            return _number(value, name, off, kind)

        signals.append(
            SignalMeta(
                label=_ascii(per_signal["label"][i][0]),
                transducer=_ascii(per_signal["transducer"][i][0]),
                physical_dim=_ascii(per_signal["physical_dim"][i][0]),
                phys_min=num("phys_min"),
                phys_max=num("phys_max"),
                dig_min=num("dig_min", int),
                dig_max=num("dig_max", int),
                prefiltering=_ascii(per_signal["prefiltering"][i][0]),
                samples_per_record=_check_spr(num("samples_per_record", int), per_signal["samples_per_record"][i]),
            )
        )

    spr = np.array([s.samples_per_record for s in signals])
    record_samples = int(spr.sum())
    needed = header_len + 2 * record_samples * n_records
    if len(buf) < needed:
        raise EdfParseError(
            f"truncated data: {n_records} records need {needed} bytes, have {len(buf)}", len(buf)
        )
    if len(set(spr.tolist())) != 1:
        raise EdfError("signals with different samples_per_record are not supported")

    body = np.frombuffer(buf[header_len:needed], dtype="<i2")
    digital = body.reshape(n_records, ns, int(spr[0])).transpose(1, 0, 2).reshape(ns, -1)
    physical = np.empty(digital.shape, dtype=np.float64)
    for i, sig in enumerate(signals):
        physical[i] = sig.to_physical(digital[i])

    rec_field = _ascii(fields["recording"])
    meta = RecordingMeta(
        recording_id=recording_id if recording_id is not None else rec_field,
        start=_parse_start(_ascii(fields["startdate"]), _ascii(fields["starttime"])),
        record_count=n_records,
        record_duration_s=duration,
        signal_count=ns,
        patient=_ascii(fields["patient"]),
        recording=rec_field,
    )
    return EegRecording(meta=meta, signals=signals, data=physical, digital=digital.copy())


def _check_spr(value: int, raw_and_offset) -> int:
    if value < 1:
        raise EdfFieldError("samples_per_record", *raw_and_offset)
    return value


def read_edf(path: str | Path, recording_id: str | None = None) -> EegRecording:
    path = Path(path)
    return parse_edf(path.read_bytes(), recording_id=recording_id or path.stem)


# ---------------------------------------------------------------------------
# EDF writing
# ---------------------------------------------------------------------------


def _pad(value, width: int) -> bytes:
    if isinstance(value, float):
        text = f"{value:.8g}"
        if len(text) > width:
            text = f"{value:.{max(width - 6, 1)}g}"
    else:
        text = str(value)
    raw = text.encode("ascii")
    if len(raw) > width:
        raise EdfError(f"value {text!r} does not fit in {width} bytes")
    return raw.ljust(width, b" ")


def write_edf_bytes(
    signals: list[SignalMeta],
    digital: np.ndarray,
    *,
    record_duration_s: float = 1,
    recording: str = "",
    patient: str = "X X X X",
    start: dt.datetime = dt.datetime(2000, 1, 1),
) -> bytes:
    """Serialize digital samples (channels x samples, int16) as EDF."""
    digital = np.asarray(digital)
    ns = len(signals)
    if digital.ndim != 2 or digital.shape[0] != ns:
        raise EdfError(f"digital shape {digital.shape} does not match {ns} signals")
    spr = signals[0].samples_per_record
    if any(s.samples_per_record != spr for s in signals):
        raise EdfError("all signals must share samples_per_record")
    if digital.shape[1] % spr:
        raise EdfError("sample count must be a multiple of samples_per_record")
    n_records = digital.shape[1] // spr

    out = io.BytesIO()
    out.write(_pad("0", 8))
    out.write(_pad(patient, 80))
    out.write(_pad(recording, 80))
    out.write(_pad(start.strftime("%d.%m.%y"), 8))
    out.write(_pad(start.strftime("%H.%M.%S"), 8))
    out.write(_pad(HEADER_BYTES + SIGNAL_HEADER_BYTES * ns, 8))
    out.write(_pad("", 44))
    out.write(_pad(n_records, 8))
    out.write(_pad(_duration_text(record_duration_s), 8))
    out.write(_pad(ns, 4))
    for name, width in _SIGNAL_FIELDS:
        for s in signals:
            value = "" if name == "reserved" else getattr(s, name)
            out.write(_pad(value, width))
    body = digital.astype("<i2").reshape(ns, n_records, spr).transpose(1, 0, 2)
    out.write(np.ascontiguousarray(body).tobytes())
    return out.getvalue()


def _duration_text(value) -> str:
    f = float(value)
    return str(int(f)) if f == int(f) else f"{f:.6g}"


def write_edf(path: str | Path, recording: EegRecording) -> None:
    """Write a recording, quantizing physical samples with each signal's calibration."""
    if recording.digital is not None:
        digital = recording.digital
    else:
        digital = np.stack([s.to_digital(x) for s, x in zip(recording.signals, recording.data)])
    Path(path).write_bytes(
        write_edf_bytes(
            recording.signals,
            digital,
            record_duration_s=recording.meta.record_duration_s,
            recording=recording.meta.recording_id,
            patient=recording.meta.patient,
            start=recording.meta.start,
        )
    )


def recording_from_physical(
    recording_id: str,
    labels: list[str],
    data: np.ndarray,
    fs: int = 256,
    phys_range: tuple[float, float] = (-3200.0, 3200.0),
) -> EegRecording:
    """Quantize physical data to 16 bits and build a recording as a parser would return it."""
    data = np.asarray(data, dtype=np.float64)
    signals = [
        SignalMeta(label=lab, phys_min=phys_range[0], phys_max=phys_range[1], samples_per_record=fs)
        for lab in labels
    ]
    digital = np.stack([s.to_digital(x) for s, x in zip(signals, data)])
    physical = np.stack([s.to_physical(d) for s, d in zip(signals, digital)])
    meta = RecordingMeta(
        recording_id=recording_id,
        record_count=data.shape[1] // fs,
        record_duration_s=Fraction(1),
        signal_count=len(labels),
    )
    return EegRecording(meta=meta, signals=signals, data=physical, digital=digital)


# ---------------------------------------------------------------------------
# Channel selection
# ---------------------------------------------------------------------------


def select_channels(rec: EegRecording, labels, *, allow_identical_duplicates: bool = False) -> EegRecording:
    """Return a recording with exactly ``labels``, in that order.

    A label present more than once is an error unless ``allow_identical_duplicates``
    is set and every copy carries the same samples (the CHB-MIT ``T8-P8`` case).
    """
    available = rec.labels
    index = []
    for lab in labels:
        hits = [i for i, a in enumerate(available) if a == lab]
        if not hits:
            raise ChannelError(f"channel {lab!r} not found; available: {', '.join(available)}")
        if len(hits) > 1 and not (
            allow_identical_duplicates and all(np.array_equal(rec.data[hits[0]], rec.data[h]) for h in hits[1:])
        ):
            raise ChannelError(f"channel {lab!r} is ambiguous: occurs {len(hits)} times")
        index.append(hits[0])
    meta = RecordingMeta(
        recording_id=rec.meta.recording_id,
        start=rec.meta.start,
        record_count=rec.meta.record_count,
        record_duration_s=rec.meta.record_duration_s,
        signal_count=len(index),
        patient=rec.meta.patient,
        recording=rec.meta.recording,
    )
    return EegRecording(
        meta=meta,
        signals=[rec.signals[i] for i in index],
        data=rec.data[index],
        digital=None if rec.digital is None else rec.digital[index],
    )


# ---------------------------------------------------------------------------
# CHB-MIT summaries and the canonical annotation CSV
# ---------------------------------------------------------------------------

_FILE_RE = re.compile(r"^File Name:\s*(\S+)\s*$")
_COUNT_RE = re.compile(r"^Number of Seizures in File:\s*(\S+)\s*$")
_TIME_RE = re.compile(r"^Seizure(?:\s+\d+)?\s+(Start|End)\s+Time:\s*(\S+)\s*seconds\s*$")


class SummaryParseError(AnnotationError):
    def __init__(self, message: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line


def parse_chbmit_summary(text: str) -> list[AnnotationSet]:
    """Parse a ``chbNN-summary.txt`` file into one AnnotationSet per EDF file."""
    blocks: list[dict] = []
    current = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line:
            continue
        if m := _FILE_RE.match(line):
            current = {"id": m.group(1), "count": None, "starts": [], "ends": [], "line": lineno}
            blocks.append(current)
            continue
        if current is None:
            continue
        if line.startswith("Number of Seizures"):
            m = _COUNT_RE.match(line)
            if not m or not m.group(1).isdigit():
                raise SummaryParseError(f"malformed seizure count: {raw_line!r}", lineno)
            current["count"] = int(m.group(1))
        elif line.startswith("Seizure") and "Time" in line:
            m = _TIME_RE.match(line)
            if not m:
                raise SummaryParseError(f"malformed seizure time: {raw_line!r}", lineno)
            try:
                value = float(m.group(2))
            except ValueError:
                raise SummaryParseError(f"malformed seizure time: {raw_line!r}", lineno) from None
            (current["starts"] if m.group(1) == "Start" else current["ends"]).append((value, lineno))

    result = []
    for b in blocks:
        if b["count"] is None:
            raise SummaryParseError(f"file {b['id']} has no 'Number of Seizures in File' line", b["line"])
        if not (b["count"] == len(b["starts"]) == len(b["ends"])):
            raise SummaryParseError(
                f"file {b['id']} declares {b['count']} seizures but lists "
                f"{len(b['starts'])} start and {len(b['ends'])} end times",
                b["line"],
            )
        pairs = []
        for (start, _), (end, lineno) in zip(b["starts"], b["ends"]):
            if end <= start:
                raise SummaryParseError(f"seizure end {end} <= start {start} in {b['id']}", lineno)
            pairs.append((start, end))
        result.append(AnnotationSet(recording_id=_strip_ext(b["id"]), seizures=tuple(pairs)))
    return result


def _strip_ext(name: str) -> str:
    return name[:-4] if name.lower().endswith(".edf") else name


ANNOTATION_COLUMNS = ("recording_id", "start_s", "end_s")


def annotations_to_csv(annotations: list[AnnotationSet]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(ANNOTATION_COLUMNS)
    for ann in annotations:
        for a, b in ann.seizures:
            w.writerow([ann.recording_id, repr(a), repr(b)])
    return out.getvalue()


def annotations_from_csv(text: str) -> dict[str, AnnotationSet]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != ANNOTATION_COLUMNS:
        raise AnnotationError(f"annotation CSV must start with header {','.join(ANNOTATION_COLUMNS)}")
    grouped: dict[str, list[tuple[float, float]]] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 3:
            raise AnnotationError(f"line {lineno}: expected 3 columns, got {len(row)}")
        try:
            grouped.setdefault(row[0], []).append((float(row[1]), float(row[2])))
        except ValueError:
            raise AnnotationError(f"line {lineno}: non-numeric time in {row!r}") from None
    return {rid: AnnotationSet(rid, tuple(ivs)) for rid, ivs in grouped.items()}
