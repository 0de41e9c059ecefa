import csv
import json
import os

import numpy as np
import pytest

from pidkit import fixtures
from pidkit.atoms import PidAtoms, validate
from pidkit.cli import InputError, document_for, dumps, parse_document, parse_grid, parse_input, run_command
from pidkit.prob import InfoValue

DATA = os.path.join(os.path.dirname(__file__), "..", "data")


def _write(tmp_path, doc, name="in.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(p)


def _run(argv, capsys):
    code = run_command(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_minimal(tmp_path):
    doc = {"kind": "discrete", "alphabet_sizes": {"m": 2, "x": 2, "y": 2}, "pmf": [0.125] * 8}
    d = parse_input(_write(tmp_path, doc))
    assert d.sizes == (2, 2, 2)


def test_parse_errors(tmp_path):
    doc = {"kind": "discrete", "alphabet_sizes": {"m": 2, "x": 2, "y": 2}, "pmf": [0.99 / 8] * 8}
    with pytest.raises(InputError, match="0.99") as e:
        parse_input(_write(tmp_path, doc))
    assert e.value.field == "pmf"
    cov = [1, 2, 0, 2, 1, 0, 0, 0, 1]
    with pytest.raises(InputError, match="min eigenvalue"):
        parse_document({"kind": "gaussian", "dims": {"m": 1, "x": 1, "y": 1}, "cov": cov})
    with pytest.raises(InputError) as e:
        parse_input(_write(tmp_path, '{"kind": "discrete",\n "pmf": [1,]}'))
    assert e.value.line == 2
    with pytest.raises(InputError, match="expected 8"):
        parse_document({"kind": "discrete", "alphabet_sizes": {"m": 2, "x": 2, "y": 2}, "pmf": [1.0]})
    with pytest.raises(InputError, match="kind"):
        parse_document({"kind": "poisson"})


def test_document_round_trip(rng):
    d = fixtures.random_triple(rng, (2, 3, 4))
    assert np.array_equal(parse_document(json.loads(json.dumps(document_for(d)))).pmf, d.pmf)
    g = fixtures.random_gaussian(rng, (2, 1, 2))
    assert np.array_equal(parse_document(json.loads(json.dumps(document_for(g)))).cov, g.cov)


def test_compute_broja_xor(capsys):
    code, out, _ = _run(["compute", "--method", "broja", "--input", os.path.join(DATA, "xor.json"),
                         "--threads", "1"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert np.allclose([doc["atoms"][k] for k in ("ui_x", "ui_y", "ri", "si")], (0, 0, 0, 1), atol=1e-6)
    assert doc["units"] == "bits" and doc["config"]["seed"] == 42


def test_compute_delta_four_bit(capsys, tmp_path):
    out_path = str(tmp_path / "out.json")
    code, _, _ = _run(["compute", "--method", "delta", "--input", os.path.join(DATA, "one_bit_each.json"),
                       "--out", out_path, "--threads", "1"], capsys)
    assert code == 0
    with open(out_path) as f:
        doc = json.load(f)
    assert np.allclose([doc["atoms"][k] for k in ("ui_x", "ui_y", "ri", "si")], (1, 1, 1, 1), atol=1e-2)
    assert doc["diagnostics"]["deficiency_x_nats"] == pytest.approx(np.log(2), abs=1e-6)


@pytest.mark.parametrize("method", ["delta", "broja", "ipid"])
def test_output_revalidates(method, capsys):
    path = os.path.join(DATA, "and.json")
    code, out, _ = _run(["compute", "--method", method, "--input", path, "--threads", "1"], capsys)
    assert code == 0
    doc = json.loads(out)
    atoms = PidAtoms(*(InfoValue.from_bits(doc["atoms"][k]) for k in ("ui_x", "ui_y", "ri", "si")), method)
    rep = validate(atoms, parse_input(path))
    assert max(rep["total"], rep["x"], rep["y"]) <= 1e-6
    assert json.loads(dumps(doc)) == doc


def test_deterministic(capsys):
    argv = ["compute", "--method", "ipid", "--input", os.path.join(DATA, "and.json"), "--threads", "1"]
    a = json.loads(_run(argv, capsys)[1])
    b = json.loads(_run(argv, capsys)[1])
    a.pop("timestamp"), b.pop("timestamp")
    assert dumps(a) == dumps(b)


def test_lambda_requires_value(capsys):
    code, _, err = _run(["compute", "--method", "lambda", "--input", os.path.join(DATA, "and.json")], capsys)
    assert code == 1 and "lambda" in json.loads(err)["message"]


def test_bad_input_exit_code(tmp_path, capsys):
    doc = {"kind": "discrete", "alphabet_sizes": {"m": 2, "x": 2, "y": 2}, "pmf": [0.99 / 8] * 8}
    code, _, err = _run(["compute", "--method", "delta", "--input", _write(tmp_path, doc)], capsys)
    assert code == 1
    assert json.loads(err)["field"] == "pmf"
    code, _, _ = _run(["compute", "--method", "nope", "--input", "x"], capsys)
    assert code == 1


def test_sweep_descending(capsys):
    code, _, err = _run(["sweep", "--input", os.path.join(DATA, "and.json"), "--grid", "10:1:logsteps=3"], capsys)
    assert code == 1
    assert "grid must be strictly increasing" in err


def test_sweep_csv(tmp_path, capsys):
    out = str(tmp_path / "s.csv")
    code, _, _ = _run(["sweep", "--input", os.path.join(DATA, "and.json"), "--grid", "0.01:100:logsteps=5",
                       "--csv", out, "--threads", "1", "--restarts", "2"], capsys)
    assert code == 0
    with open(out) as f:
        rows = list(csv.DictReader(f))
    assert list(rows[0]) == ["lambda", "total_bits", "kl_bits", "cmi_bits", "converged"]
    assert len(rows) == 5
    totals = [float(r["total_bits"]) for r in rows]
    assert all(b >= a - 1e-6 for a, b in zip(totals, totals[1:]))


def test_parse_grid():
    assert parse_grid("0.001:1000:logsteps=7")[3] == pytest.approx(1.0)
    assert parse_grid("0, 0.5, 2") == [0.0, 0.5, 2.0]
    with pytest.raises(InputError):
        parse_grid("1:2:steps=3")


def test_blackwell_command(capsys):
    code, out, _ = _run(["blackwell", "--input", os.path.join(DATA, "copy_const_y.json")], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["x_sufficient_for_y"]["sufficient"] and not doc["y_sufficient_for_x"]["sufficient"]
    assert doc["lecam"]["y_emulating_x"] == pytest.approx(0.5)


def test_blackwell_gaussian(tmp_path, capsys):
    g = fixtures.scalar_gaussian(4.0, 1.0)
    code, out, _ = _run(["blackwell", "--input", _write(tmp_path, document_for(g))], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["x_sufficient_for_y"]["sufficient"] and not doc["y_sufficient_for_x"]["sufficient"]


def test_risk_audit_command(capsys):
    code, out, _ = _run(["risk-audit", "--input", os.path.join(DATA, "and.json"), "--losses", "5", "--seed", "3",
                         "--threads", "1", "--verbose"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["max_violation"] <= 1e-9 and "rows" in doc and doc["g"].startswith("sqrt")


def test_ipid_gaussian_command(tmp_path, capsys):
    g = fixtures.gaussian_from_lambdas(np.array([[0.8]]), np.array([[0.5]]))
    code, out, _ = _run(["compute", "--method", "ipid", "--input", _write(tmp_path, document_for(g)),
                         "--threads", "1"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["diagnostics"]["x"]["supremum_at_boundary"]


def test_threads_env(monkeypatch):
    from pidkit.config import SolverConfig

    monkeypatch.setenv("PIDKIT_THREADS", "3")
    assert SolverConfig().n_threads() == 3
    assert SolverConfig(threads=2).n_threads() == 2
