"""CSV ingestion and report writers."""

from __future__ import annotations

import csv
import io
import os
from pathlib import Path

import numpy as np

from .signals import CHANNELS, FEATURE_NAMES, FEATURE_SOURCES, LABEL_NAMES, FeatureMatrix, SignalRecord

SIGNAL_HEADER = ("time",) + CHANNELS + ("label",)
JITTER_TOLERANCE = 1e-3

_PREFIX_SOURCES = {"heda": "H-EDA", "feda": "F-EDA", "ecg": "ECG", "resp": "RESP"}


class ValidationError(ValueError):
    """Input file or configuration does not match its schema."""


def _existing(path) -> Path:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"{path}: no such file")
    return path


def _parse_label(text: str, where: str) -> int:
    t = text.strip().lower()
    if t in LABEL_NAMES:
        return LABEL_NAMES.index(t)
    if t in ("0", "1", "2"):
        return int(t)
    raise ValidationError(f"{where}: invalid label {text!r}; expected one of {', '.join(LABEL_NAMES)}")


def read_signal_csv(path) -> SignalRecord:
    """Read ``time,ecg,hand_eda,foot_eda,resp,label`` rows into a record.

    The sampling rate comes from the first two timestamps; every later step
    must agree with it to within 0.1%.
    """
    path = _existing(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        missing = [c for c in SIGNAL_HEADER if c not in header]
        if missing:
            raise ValidationError(f"{path}: missing column(s): {', '.join(missing)}")
        col = {c: header.index(c) for c in SIGNAL_HEADER}
        data = {c: [] for c in SIGNAL_HEADER[:-1]}
        labels = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValidationError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                for c in data:
                    data[c].append(float(row[col[c]]))
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: non-numeric value") from None
            labels.append(_parse_label(row[col["label"]], f"{path}:{lineno}"))
    t = np.asarray(data["time"])
    if t.size < 2:
        raise ValidationError(f"{path}: need at least 2 samples")
    dt = t[1] - t[0]
    if not dt > 0:
        raise ValidationError(f"{path}: time must be strictly increasing")
    steps = np.diff(t)
    bad = np.flatnonzero(np.abs(steps - dt) > JITTER_TOLERANCE * dt)
    if bad.size:
        raise ValidationError(
            f"{path}:{int(bad[0]) + 3}: non-uniform sampling (step {steps[bad[0]]:g} s vs {dt:g} s)"
        )
    for c in CHANNELS:
        if not np.all(np.isfinite(data[c])):
            raise ValidationError(f"{path}: non-finite values in {c!r}")
    return SignalRecord({c: np.asarray(data[c]) for c in CHANNELS}, 1.0 / dt, np.asarray(labels))


def write_signal_csv(path, record: SignalRecord, t0: float = 0.0) -> None:
    fs = record.sampling_rate_hz
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SIGNAL_HEADER)
        cols = [record.channels[c] for c in CHANNELS]
        for i in range(record.n_samples):
            w.writerow(
                [f"{t0 + i / fs:.6f}"]
                + [f"{v[i]:.9g}" for v in cols]
                + [LABEL_NAMES[record.labels[i]]]
            )


def _source_for(name: str) -> str:
    if name in FEATURE_NAMES:
        return FEATURE_SOURCES[FEATURE_NAMES.index(name)]
    prefix = name.split("_", 1)[0]
    if prefix not in _PREFIX_SOURCES:
        raise ValidationError(f"cannot infer the signal source of feature {name!r}")
    return _PREFIX_SOURCES[prefix]


def format_feature_csv(fm: FeatureMatrix) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("label",) + fm.names)
    for label, row in zip(fm.labels, fm.values):
        w.writerow([LABEL_NAMES[label]] + [f"{v:.9g}" for v in row])
    return buf.getvalue()


def write_feature_csv(path, fm: FeatureMatrix) -> None:
    Path(path).write_text(format_feature_csv(fm))


def read_feature_csv(path) -> FeatureMatrix:
    path = _existing(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        if not header or header[0] != "label":
            raise ValidationError(f"{path}: first column must be 'label'")
        names = tuple(header[1:])
        sources = tuple(_source_for(n) for n in names)
        rows, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValidationError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            labels.append(_parse_label(row[0], f"{path}:{lineno}"))
            try:
                rows.append([float(v) for v in row[1:]])
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: non-numeric value") from None
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    try:
        return FeatureMatrix(np.array(rows), np.array(labels), names, sources)
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def format_rows(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def write_all_or_nothing(outputs: dict[Path, str]) -> None:
    """Write several files so that either all of them land or none do."""
    staged = []
    try:
        for path, text in outputs.items():
            tmp = path.with_name(path.name + ".partial")
            tmp.write_text(text)
            staged.append((tmp, path))
        for tmp, path in staged:
            os.replace(tmp, path)
    except BaseException:
        for tmp, path in staged:
            for p in (tmp, path):
                if p.exists():
                    p.unlink()
        raise
