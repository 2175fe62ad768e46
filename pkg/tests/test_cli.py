import csv
import io
import json
import subprocess
import sys

import pytest

from ncquant.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_default_passes(capsys):
    code, out, _ = run(capsys, "verify")
    report = json.loads(out)
    assert code == 0
    assert list(report) == sorted(report)
    assert all(set(v) == {"pass", "residual", "tolerance"} for v in report.values())
    assert all(v["pass"] for v in report.values())


def test_verify_adapts_to_half_integer_lambda(capsys):
    code, out, _ = run(capsys, "verify", "--lambda", "0.5", "--kmax", "3")
    assert code == 0
    assert json.loads(out)["quantize.action_spectrum"]["pass"]


@pytest.mark.parametrize("flags", [["--grid-n", "2"], ["--grid-n", "100"], ["--kmax", "0"], ["--grid-l", "-1"]])
def test_verify_config_errors(capsys, flags):
    code, out, err = run(capsys, "verify", *flags)
    assert code == 2 and out == "" and "error" in err


def test_usage_error(capsys):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "verify", "--kmax", "many")[0] == 2


def test_verify_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["verify", "--seed", "7", "--out", str(a)]) == 0
    assert main(["verify", "--seed", "7", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_verify_csv(capsys):
    code, out, _ = run(capsys, "verify", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and rows and all(r["pass"] == "True" for r in rows)


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kmax": 2, "lambda": [0.25], "format": "csv"}))
    code, out, _ = run(capsys, "spectrum", "--config", str(cfg))
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert [r[0] for r in rows[1:]] == ["-2", "-1", "0", "1", "2"]
    assert float(rows[3][1]) == 0.5 * 0.25**2
    code, out, _ = run(capsys, "spectrum", "--config", str(cfg), "--kmax", "1")
    assert len(list(csv.reader(io.StringIO(out)))) == 4
    cfg.write_text(json.dumps({"grid-n": 4}))
    assert run(capsys, "verify", "--config", str(cfg))[0] == 2
    cfg.write_text(json.dumps({"colour": "red"}))
    assert run(capsys, "verify", "--config", str(cfg))[0] == 2


def test_bracket_examples(capsys):
    code, out, _ = run(capsys, "bracket", "x1", "x2", "--at", "x1=0,x2=0,x3=1")
    doc = json.loads(out)
    assert code == 0 and doc["bracket"] == "x3" and doc["values"][0]["value"] == 1.0
    code, out, _ = run(capsys, "bracket", "x1*x3", "x1*x3")
    assert json.loads(out)["bracket"] == "0"
    code, out, _ = run(capsys, "bracket", "r", "gamma", "--structure", "so3-aa", "--samples", "10")
    assert all(v["value"] == 0.0 for v in json.loads(out)["values"])
    code, out, _ = run(capsys, "bracket", "x1", "x2", "--at", "x1=0,x2=0,x3=1", "--pretty")
    assert out.splitlines()[0] == "{x1, x2} = x3"


def test_bracket_errors(capsys):
    assert run(capsys, "bracket", "x1 +", "x2")[0] == 2
    assert run(capsys, "bracket", "x9", "x2")[0] == 2
    assert run(capsys, "bracket", "1/(x1-1)", "x2", "--at", "x1=1,x2=0,x3=0")[0] == 2


def test_bracket_custom_structure(tmp_path, capsys):
    path = tmp_path / "w.json"
    path.write_text(json.dumps({"chart": ["q", "p"], "components": [["0", "1"], ["-1", "0"]]}))
    code, out, _ = run(capsys, "bracket", "q^2", "p", "--structure", str(path), "--at", "q=3,p=0")
    doc = json.loads(out)
    assert doc["bracket"] == "2*q" and doc["values"][0]["value"] == 6.0


def test_spectrum_top_rows(capsys):
    code, out, _ = run(capsys, "spectrum", "--kmax", "3", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["k", "eigenvalue", "multiplicity"]
    assert [int(r[0]) for r in rows[1:]] == list(range(-3, 4))
    assert [float(r[1]) for r in rows[1:]] == [4.5, 2.0, 0.5, 0.0, 0.5, 2.0, 4.5]
    assert [int(r[2]) for r in rows[1:]] == [2, 2, 2, 1, 2, 2, 2]


def test_spectrum_constant(capsys):
    code, out, _ = run(capsys, "spectrum", "--kmax", "3", "--hamiltonian", "1.75")
    doc = json.loads(out)
    assert doc["spectrum"] == [{"value": 1.75, "mult": 7}]


def test_spectrum_half_integer_lambda(capsys):
    # (k - 1/2)^2 pairs k with 1 - k, so every level inside the window is doubled
    code, out, _ = run(capsys, "spectrum", "--kmax", "3", "--lambda", "0.5")
    doc = json.loads(out)
    assert all(s["value"] != 0.0 for s in doc["spectrum"])
    assert [m["value"] for m in doc["modes"]] == [0.5 * (k - 0.5) ** 2 for k in range(-3, 4)]
    assert [s["mult"] for s in doc["spectrum"]] == [2, 2, 2, 1]


def test_spectrum_with_noncompact_action(capsys):
    code, out, _ = run(capsys, "spectrum", "--kmax", "1", "--grid-n", "11", "-H", "r + x1^2")
    doc = json.loads(out)
    assert code == 0 and sum(s["mult"] for s in doc["spectrum"]) == 3 * 11


def test_spectrum_rejects_non_polynomial(capsys):
    assert run(capsys, "spectrum", "-H", "sin(r)")[0] == 2
    assert run(capsys, "spectrum", "-H", "gamma*r")[0] == 2


def test_dirac_examples(capsys):
    code, out, _ = run(capsys, "dirac", "J", "sin(alpha)")
    doc = json.loads(out)
    assert code == 0 and doc["exact"] and max(doc["residual"]) < 1e-12
    code, out, _ = run(capsys, "dirac", "p", "q^3", "--ladder", "51,101,201")
    doc = json.loads(out)
    assert code == 0 and 1.8 <= doc["order"] <= 2.2
    code, out, _ = run(capsys, "dirac", "sin(q)*p", "sin(q)*p")
    assert code == 0 and json.loads(out)["residual"] == [0.0, 0.0, 0.0]
    code, out, _ = run(capsys, "dirac", "x1", "sin(gamma)", "--space", "so3", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "N,h,residual,operator_norm"
    assert run(capsys, "dirac", "p", "q", "--ladder", "50,100")[0] == 2


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "ncquant", "bracket", "x2", "x3", "--at", "x1=2,x2=0,x3=0"],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0 and json.loads(res.stdout)["values"][0]["value"] == 2.0
