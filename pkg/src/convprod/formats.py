"""File formats: measure TSV, sequence CSV, spectral CSV and JSON configs."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .errors import InputError
from .measures import LatticeMeasure, MASS_TOL, new_measure


def fmt(x: float) -> str:
    """17 significant digits, enough for a lossless round trip."""
    return format(float(x), ".17g")


def parse_measure_tsv(text: str, mass_tol: float = MASS_TOL) -> LatticeMeasure:
    points = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split("\t") if "\t" in line else line.split()
        if len(parts) != 2:
            raise InputError(f"line {lineno}: expected 'k<TAB>mass'")
        try:
            points.append((int(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise InputError(f"line {lineno}: {exc}") from None
    return new_measure(points, mass_tol)


def read_measure(path, mass_tol: float = MASS_TOL) -> LatticeMeasure:
    return parse_measure_tsv(Path(path).read_text(), mass_tol)


def format_measure_tsv(mu: LatticeMeasure) -> str:
    return "".join(f"{k}\t{fmt(m)}\n" for k, m in mu.points())


def write_measure(mu: LatticeMeasure, path) -> None:
    Path(path).write_text(format_measure_tsv(mu))


def parse_sequence_csv(text: str) -> np.ndarray:
    vals = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip().rstrip(",")
        if not line:
            continue
        try:
            vals.append(float(line))
        except ValueError:
            raise InputError(f"line {lineno}: not a number: {line!r}") from None
    return np.array(vals)


def read_sequence(path) -> np.ndarray:
    return parse_sequence_csv(Path(path).read_text())


def format_spectrum_csv(samples) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "re", "im", "abs"])
    for t, v in zip(samples.grid.nodes, samples.values):
        w.writerow([fmt(t), fmt(v.real), fmt(v.imag), fmt(abs(v))])
    return buf.getvalue()


def format_rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def read_json(path_or_text) -> dict:
    p = Path(path_or_text)
    try:
        text = p.read_text() if p.exists() else str(path_or_text)
    except OSError:
        text = str(path_or_text)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from None
