import io
import json

import numpy as np
import pandas as pd
import pytest

from solvegeo.core.errors import IntegratorError
from solvegeo.core.sphere import parse_obj
from solvegeo.core.verifier import PERIOD_TABLE
from solvegeo.scripts import cli


def run_to_file(tmp_path, name, *argv):
    out = tmp_path / name
    status = cli.run([*argv, "--out", str(out)])
    return status, out


def test_table_is_stable(tmp_path):
    status, first = run_to_file(tmp_path, "a.csv", "table")
    assert status == 0
    _, second = run_to_file(tmp_path, "b.csv", "table")
    assert first.read_bytes() == second.read_bytes()
    frame = pd.read_csv(first)
    assert list(frame.columns) == ["alpha", "period", "limit"]
    assert len(frame) == 10
    assert (frame["period"] > frame["limit"]).all()
    printed = np.array([p for _, p in PERIOD_TABLE])
    assert np.max(np.abs(frame["period"].to_numpy() - printed)) < 5e-3


def test_period_at_alpha_one(tmp_path):
    status, out = run_to_file(tmp_path, "p.csv", "period", "--alpha", "1", "--beta", "0.999")
    assert status == 0
    row = pd.read_csv(out).iloc[0]
    assert row["period"] == pytest.approx(4.44622, abs=1e-5)
    assert row["x0"] == pytest.approx(0.7071, abs=0.05)


def test_period_range_as_json(tmp_path):
    status, out = run_to_file(tmp_path, "p.json", "period", "--alpha", "0.5", "--x0-range", "0.6:0.9:4",
                              "--format", "json")
    assert status == 0
    document = json.loads(out.read_text())
    assert document["kind"] == "period"
    assert document["schema_version"] == "1.0"
    assert len(document["rows"]) == 4


def test_period_writes_to_stdout(capsys):
    assert cli.run(["period", "--alpha", "0.5", "--x0", "0.8"]) == 0
    frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert frame["period"].iloc[0] > 6.28


@pytest.mark.parametrize("argv", [
    ["period", "--alpha", "0.5"],
    ["period", "--alpha", "0.5", "--beta", "0.5", "--x0", "0.8"],
    ["period", "--alpha", "0.5", "--x0-range", "0.9:0.6:4"],
    ["sphere", "--alpha", "0.5", "--res", "8"],
    ["nonsense"],
    [],
])
def test_usage_errors(argv):
    assert cli.run(argv) == 2


def test_domain_errors_exit_two():
    assert cli.run(["period", "--alpha", "0.5", "--x0", "0.3"]) == 2
    assert cli.run(["period", "--alpha", "1.5", "--beta", "0.5"]) == 2
    assert cli.run(["flowline", "--alpha", "0.5", "--x0", "1.0"]) == 2


def test_help_exits_zero():
    assert cli.run(["--help"]) == 0


def test_integrator_failure_exits_one(monkeypatch, capsys):
    def broken(beta, alpha):
        raise IntegratorError("step size too small", t_reached=1.5)

    monkeypatch.setattr(cli, "period", broken)
    assert cli.run(["period", "--alpha", "0.5", "--beta", "0.7"]) == 1
    document = json.loads(capsys.readouterr().out)
    assert document["pass"] is False
    assert document["t_reached"] == 1.5


def test_small_sphere(tmp_path):
    status, out = run_to_file(tmp_path, "s.obj", "sphere", "--alpha", "0.5", "--radius", "1", "--res", "4,8")
    assert status == 0
    data = out.read_bytes()
    assert data.startswith(b"# solvegeo geodesic sphere\n")
    vertices, faces = parse_obj(data)
    assert vertices.shape == (3 * 8 + 2, 3)
    assert len(faces) == 4 * 8


def test_flow_and_flowline(tmp_path):
    status, out = run_to_file(tmp_path, "f.csv", "flow", "--alpha", "0.5", "--u", "0.6,0.64,0.48",
                              "--time", "5", "--n", "20")
    assert status == 0
    frame = pd.read_csv(out)
    assert (frame["level"] - frame["level"].iloc[0]).abs().max() < 1e-9

    status, out = run_to_file(tmp_path, "l.csv", "flowline", "--alpha", "0.5", "--x0", "0.8", "--n", "20")
    assert status == 0
    assert list(pd.read_csv(out).columns) == ["t", "a", "b", "aprime", "bprime"]


def test_cylinder_and_bprime(tmp_path):
    status, out = run_to_file(tmp_path, "c.csv", "cylinder", "--alpha", "0.5", "--beta", "0.8",
                              "--length", "10", "--n", "30")
    assert status == 0
    assert set(pd.read_csv(out)["kind"]) == {"profile", "geodesic"}

    status, out = run_to_file(tmp_path, "b.csv", "bprime", "--alpha", "0.5", "--x0", "0.9", "--n", "50")
    assert status == 0
    assert (pd.read_csv(out)["bprime"] > 0.0).all()


def test_cutlocus_range(tmp_path):
    status, out = run_to_file(tmp_path, "c.csv", "cutlocus", "--alpha", "1", "--x0-range", "0.75:0.95:3")
    assert status == 0
    frame = pd.read_csv(out)
    assert len(frame) == 3
    assert (frame["b_end"] < frame["a_end"]).all()


def test_g_function_range(tmp_path):
    status, out = run_to_file(tmp_path, "g.csv", "g-function", "--x0-range", "0.6:0.99:5")
    assert status == 0
    frame = pd.read_csv(out)
    assert (frame["G"] < 0.0).all()
    assert (frame["ratio"] < 1.0).all()


def test_verify_with_restricted_checks(tmp_path):
    config = tmp_path / "suite.json"
    config.write_text(json.dumps({
        "enabled_checks": ["period_table", "special_functions", "boundary_symmetry"],
        "loops_per_alpha": 3,
        "sphere_enabled": False,
    }))
    status, out = run_to_file(tmp_path, "v.json", "verify", "--alpha", "1", "--config", str(config))
    assert status == 0
    document = json.loads(out.read_text())
    assert document["kind"] == "verify"
    assert document["pass"] is True
    names = {c["check_name"] for c in document["checks"]}
    assert {"period_table", "elliptic_K", "boundary_symmetry_alpha_one"} <= names
    assert "geodesic_sphere" not in names
