import json

import numpy as np

from ncquant.export import dumps, read_matrix_csv, spectrum_document, write_matrix_csv
from ncquant.quantize import (
    ActionAngleSpace,
    AffineObservable,
    QuantizationParams,
    hamiltonian_operator,
    quantize_observable,
    spectrum,
)

CYL = ActionAngleSpace.canonical(periodic=[("J", "alpha")], noncompact=[("p", "q")])


def test_spectrum_document_shape():
    p = QuantizationParams(ActionAngleSpace.canonical(periodic=[("r", "alpha")]), (0.0,), 2)
    H = hamiltonian_operator("0.5*r^2", p)
    doc = json.loads(dumps(spectrum_document(H, spectrum(H), "0.5*r^2")))
    assert doc["observable"] == "0.5*r^2"
    assert doc["spectrum"] == [{"value": 0.0, "mult": 1}, {"value": 0.5, "mult": 2}, {"value": 2.0, "mult": 2}]
    assert doc["params"] == {"pairs": [["r", "alpha"]], "lambda": [0.0], "kmax": 2, "grid": []}


def test_dumps_is_canonical():
    a = dumps({"b": 1, "a": [1.5, 2]})
    assert a == '{"a":[1.5,2],"b":1}\n'
    assert dumps({"b": 1, "a": 2}, pretty=True).startswith('{\n  "a": 2')


def test_matrix_csv_roundtrip(tmp_path):
    p = QuantizationParams(CYL, (0.25,), 1, ((3.0, 5),))
    A = quantize_observable(AffineObservable.from_expr("sin(q)*p + cos(alpha)*J", CYL), p)
    path = tmp_path / "a.csv"
    text = write_matrix_csv(A, path)
    assert path.read_text() == text
    lines = text.splitlines()
    assert len(lines) == p.dim
    assert lines[0].count('"') == 2 * p.dim
    assert np.array_equal(read_matrix_csv(path), A.dense())
    assert np.array_equal(read_matrix_csv(text), A.dense())
