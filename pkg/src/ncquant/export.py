"""JSON and CSV serialization of spectra, operators and reports."""

from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .quantize import DiscreteOperator

__all__ = ["spectrum_document", "dumps", "write_text", "write_matrix_csv", "read_matrix_csv"]


def spectrum_document(op: DiscreteOperator, spec, observable: str | None = None) -> dict:
    return {
        "params": op.params.to_json(),
        "observable": observable if observable is not None else op.description,
        "spectrum": [{"value": v, "mult": m} for v, m in spec],
    }


def dumps(obj, pretty: bool = False) -> str:
    """Deterministic JSON: sorted keys, fixed separators, trailing newline."""
    if pretty:
        return json.dumps(obj, sort_keys=True, indent=2) + "\n"
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def write_text(text: str, path=None):
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def write_matrix_csv(op: DiscreteOperator | np.ndarray, path=None) -> str:
    """Dense matrix, row-major, one ``"re,im"`` cell per entry."""
    m = op.dense() if isinstance(op, DiscreteOperator) else np.asarray(op, dtype=complex)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in m:
        w.writerow([f"{float(z.real)!r},{float(z.imag)!r}" for z in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_matrix_csv(source) -> np.ndarray:
    text = Path(source).read_text() if not isinstance(source, str) or "\n" not in source else source
    rows = []
    for row in csv.reader(io.StringIO(text)):
        cells = []
        for cell in row:
            re, im = cell.split(",")
            cells.append(complex(float(re), float(im)))
        rows.append(cells)
    return np.array(rows, dtype=complex)
