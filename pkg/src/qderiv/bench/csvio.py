"""Deterministic CSV output for the benchmark commands.

Numbers are written as ``{:.11e}`` (12 significant digits, '.' decimal),
integers in plain decimal, missing values as empty fields and vectors as
``;``-joined numbers.  :func:`read_csv` parses those conventions back, and
writing the parsed rows again reproduces the file byte for byte.
"""
from __future__ import annotations

import csv
import io
import re

import numpy as np

_INT = re.compile(r"-?(0|[1-9][0-9]*)$")
_FLOAT = re.compile(r"-?[0-9]\.[0-9]{11}e[+-][0-9]{2,3}$|-?inf$|nan$")
TRAILER = ("seed", "stream_id", "config_hash")


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.11e}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return ";".join(format_value(float(v)) for v in np.ravel(value))
    return str(value)


def parse_value(text: str):
    if text == "":
        return None
    if ";" in text:
        return [float(t) for t in text.split(";")]
    if _INT.match(text):
        return int(text)
    if _FLOAT.match(text):
        return float(text)
    return text


def render(columns, rows) -> str:
    """CSV text for ``rows`` (dicts); keys outside ``columns`` are an error."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        extra = set(row) - set(columns)
        if extra:
            raise ValueError(f"unknown CSV columns {sorted(extra)}")
        writer.writerow([format_value(row.get(c)) for c in columns])
    return buf.getvalue()


def write_csv(path, columns, rows) -> None:
    text = render(columns, rows)
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def read_csv(path) -> tuple[list[str], list[dict]]:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            columns = next(reader)
            rows = [dict(zip(columns, (parse_value(v) for v in line))) for line in reader]
    except OSError as exc:
        raise OSError(f"cannot read CSV from {path}: {exc}") from exc
    return columns, rows
