import csv
import json
import math

import numpy as np
import pytest

from jjarray import cli
from jjarray.analysis import estimate_squid
from jjarray.implicit import sweep_implicit
from jjarray.model import JunctionArray


def write_config(tmp_path, cfg, name="run.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def read_rows(path):
    with open(path) as fh:
        lines = fh.readlines()
    assert lines[0].startswith("# resolved_config: ")
    return lines, list(csv.DictReader(lines[1:]))


SINGLE = {
    "device": {"positions": [4.0], "strengths": [0.8], "length": 9.0, "feed": 0.5},
    "H": {"start": 0.0, "stop": 6.0, "steps": 7},
    "method": "all",
}


def test_sweep_all_methods_single_junction(tmp_path):
    out = tmp_path / "c.csv"
    assert cli.main(["sweep", "--config", write_config(tmp_path, SINGLE), "--out", str(out)]) == 0
    lines, rows = read_rows(out)
    assert lines[1].strip() == "H,gamma_max,phi1_at_max,method,flags"
    assert {r["method"] for r in rows} == {"newton-up", "newton-down", "implicit", "magnetic"}
    assert len(rows) == 4 * 7
    for r in rows:
        assert float(r["gamma_max"]) == pytest.approx(0.8, abs=1e-5)
    resolved = json.loads(lines[0].split(": ", 1)[1])
    assert resolved["grid"]["phi1_samples"] == 400
    assert resolved["newton"]["gamma_bisect_tol"] == pytest.approx(0.8e-6)


def test_sweep_is_deterministic(tmp_path):
    cfg = dict(SINGLE, method="implicit", device={"positions": [1.0, 2.5], "strengths": [1.0, 0.4], "length": 5.0})
    path = write_config(tmp_path, cfg)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cli.main(["sweep", "--config", path, "--out", str(a)])
    cli.main(["sweep", "--config", path, "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()
    _, rows = read_rows(a)
    for r in rows:
        assert len(r["gamma_max"].replace(".", "").replace("-", "").lstrip("0")) <= 12


def test_sweep_json_output(tmp_path):
    cfg = dict(SINGLE, method="magnetic", output={"format": "json"})
    out = tmp_path / "c.json"
    assert cli.main(["sweep", "--config", write_config(tmp_path, cfg), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["curves"][0]["method"] == "magnetic"
    assert len(doc["curves"][0]["H"]) == 7
    assert doc["resolved_config"]["output"]["format"] == "json"


def test_physical_device_config(tmp_path, capsys):
    cfg = {
        "device": {"lambda_j": 5.6, "strip_width": 5.0, "junction_sides": [1.0, 1.0],
                   "positions": [20.0, 33.0], "length": 56.0, "normalize": True},
        "H": [0.0, 1.0],
        "method": "magnetic",
    }
    assert cli.main(["sweep", "--config", write_config(tmp_path, cfg), "--out", "-"]) == 0
    out = capsys.readouterr().out
    assert '"strengths": [0.0357142857' in out


@pytest.mark.parametrize(
    "cfg",
    [
        dict(SINGLE, H={"start": 0, "stop": 1, "steps": 1}),
        dict(SINGLE, method="fast"),
        dict(SINGLE, newton={"bogus": 1}),
        dict(SINGLE, grid={"phi1_samples": 2}),
        dict(SINGLE, device={"positions": [1.0]}),
        dict(SINGLE, device={"positions": [1.0], "strengths": [-1.0], "length": 2.0}),
        dict(SINGLE, output={"format": "xml"}),
        {"H": [0.0]},
    ],
)
def test_config_errors_exit_2(tmp_path, cfg, capsys):
    assert cli.main(["sweep", "--config", write_config(tmp_path, cfg)]) == 2
    assert "config error" in capsys.readouterr().err


def test_invalid_json_exit_2(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert cli.main(["sweep", "--config", str(p)]) == 2


def test_missing_file_exit_3(tmp_path):
    assert cli.main(["sweep", "--config", str(tmp_path / "nope.json")]) == 3
    assert cli.main(["estimate", "--curve", str(tmp_path / "nope.csv")]) == 3


def test_solver_failure_exit_4(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise cli.CurveError("no static solution")

    monkeypatch.setattr(cli, "gamma_max_newton", boom)
    cfg = dict(SINGLE, method="newton-up")
    assert cli.main(["sweep", "--config", write_config(tmp_path, cfg)]) == 4


def test_thread_env(monkeypatch, tmp_path):
    monkeypatch.setenv("JJARRAY_THREADS", "1")
    assert cli.worker_count() == 1
    monkeypatch.setenv("JJARRAY_THREADS", "many")
    assert cli.main(["sweep", "--config", write_config(tmp_path, SINGLE)]) == 2


def test_analyze_report(tmp_path, capsys):
    cfg = {"device": {"first": 1.0, "spacings": [1.5, 5 / 3], "strengths": 1.0, "length": 6.0}}
    assert cli.main(["analyze", "--config", write_config(tmp_path, cfg)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["period"]["value"] == pytest.approx(12 * math.pi)
    assert "not_applicable" in rep["regularity"]
    assert "not_applicable" in rep["bump_count"]

    cfg = {"device": {"positions": [3.84, 6.16], "strengths": [0.0357, 0.0357], "length": 10.0}}
    cli.main(["analyze", "--config", write_config(tmp_path, cfg)])
    rep = json.loads(capsys.readouterr().out)
    assert rep["regularity"]["lower"] == pytest.approx(0.032969, abs=1e-6)
    assert rep["regularity"]["upper"] == pytest.approx(0.038923, abs=1e-6)
    assert rep["magnetic_shift"]["coefficient"] == 0.0
    assert rep["extrema"]["gamma_at_max"] == pytest.approx(0.0714)


def test_estimate_round_trip(tmp_path, capsys):
    arr = JunctionArray((2.0, 3.5), (0.3, 0.12), 6.0)
    H = np.linspace(0, 2 * math.pi / 1.5, 60, endpoint=False)
    cfg = {"device": {"positions": list(arr.positions), "strengths": list(arr.strengths), "length": 6.0},
           "H": {"values": H.tolist()}, "method": "implicit"}
    out = tmp_path / "c.csv"
    cli.main(["sweep", "--config", write_config(tmp_path, cfg), "--out", str(out)])
    capsys.readouterr()
    assert cli.main(["estimate", "--curve", str(out)]) == 0
    est = json.loads(capsys.readouterr().out)
    mem = estimate_squid(sweep_implicit(arr, H))
    assert est["total"] == float(f"{mem.total:.12g}")
    assert est["difference"] == float(f"{mem.difference:.12g}")
    assert est["method"] == "implicit"
    assert cli.main(["estimate", "--curve", str(out), "--method", "magnetic"]) == 2


def test_fit_command(tmp_path, capsys):
    from jjarray.magnetic import gamma_max_magnetic_values

    arr = JunctionArray((1.0, 2.0, 3.5), (1.0, 0.8, 0.6), 10.0)
    f = np.linspace(-100, 100, 101)
    data = tmp_path / "m.csv"
    data.write_text("field,current\n" + "".join(f"{x},{2.0 * g}\n" for x, g in zip(f, gamma_max_magnetic_values(arr, 0.1 * f))))
    cfg = {"device": {"positions": [1.0, 2.0, 3.5], "strengths": [1.0, 0.8, 0.6], "length": 10.0}}
    out = tmp_path / "fit.json"
    assert cli.main(["fit", "--data", str(data), "--config", write_config(tmp_path, cfg), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["alpha"] == pytest.approx(0.1, rel=1e-6)
    assert doc["beta"] == pytest.approx(2.0, rel=1e-6)
    assert len(doc["residuals"]) == 101
    assert len(doc["model_curve"]["field"]) == 400

    bad = tmp_path / "bad.csv"
    bad.write_text("0,1\n0,2\n")
    assert cli.main(["fit", "--data", str(bad), "--config", write_config(tmp_path, cfg)]) == 2
