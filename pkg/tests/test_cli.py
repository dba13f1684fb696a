"""Command-line harness: artifacts, exit codes, determinism, sweeps."""

import csv
import json
from pathlib import Path

import numpy as np
import pytest

from desing import cli
from desing.reports import RESULTS_COLUMNS, ExperimentResult

SPEC = Path(__file__).resolve().parents[1] / "specs" / "cusp1d_alpha1.toml"


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_writes_expected_artifacts(tmp_path, capsys):
    out = tmp_path / "out"
    rc = cli.main(["run", str(SPEC), "--grid", "33", "--dt", "0.25",
                   "--mode", "direct", "--out", str(out)])
    assert rc == 0
    rows = _read_csv(out / "results.csv")
    assert rows[0] == list(RESULTS_COLUMNS)
    assert len(rows) == 2
    record = dict(zip(rows[0], rows[1]))
    assert record["geometry"].startswith("cusp")
    assert record["mode"] == "direct"
    assert float(record["err_inf"]) < 0.05
    assert record["wall_ms"] == ""
    assert (out / "timings.csv").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert summary["backend"] in ("numpy", "numba")
    assert len(summary["levels"]) == 1
    assert "wrote" in capsys.readouterr().out


def test_run_ladder_reports_orders(tmp_path):
    out = tmp_path / "out"
    rc = cli.main(["run", str(SPEC), "--grid", "33,65", "--dt-levels", "2",
                   "--mode", "direct", "--out", str(out)])
    assert rc == 0
    rows = _read_csv(out / "results.csv")
    assert len(rows) == 1 + 4
    summary = json.loads((out / "summary.json").read_text())
    assert len(summary["levels"]) == 4
    assert len(summary["space_orders"]) == 1
    assert len(summary["time_orders"]) == 1
    # The manufactured solution converges at second order in space.
    assert summary["space_orders"][0] is not None
    assert summary["space_orders"][0] > 1.5


def test_run_is_byte_deterministic(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        rc = cli.main(["run", str(SPEC), "--grid", "33", "--mode", "direct",
                       "--out", str(out)])
        assert rc == 0
        outs.append((out / "results.csv").read_bytes())
    assert outs[0] == outs[1]


def test_run_timings_flag_fills_wall_column(tmp_path):
    out = tmp_path / "out"
    rc = cli.main(["run", str(SPEC), "--grid", "17", "--mode", "direct",
                   "--timings", "--out", str(out)])
    assert rc == 0
    rows = _read_csv(out / "results.csv")
    record = dict(zip(rows[0], rows[1]))
    assert float(record["wall_ms"]) > 0.0


def test_run_dump_trajectory(tmp_path):
    out = tmp_path / "out"
    rc = cli.main(["run", str(SPEC), "--grid", "17", "--mode", "both",
                   "--dump-trajectory", "--out", str(out)])
    assert rc == 0
    with np.load(out / "trajectory.npz") as payload:
        assert payload["trajectory"].shape == (17, 17)
        assert payload["times"].shape == (17,)
        assert "hat_trajectory" in payload


@pytest.mark.parametrize("argv", [
    ["run", "no_such_file.toml"],
    ["run", str(SPEC), "--grid", "6x5"],
    ["run", str(SPEC), "--dt-levels", "abc"],
    ["run", str(SPEC), "--dt-levels", "0"],
    ["run", str(SPEC), "--dt", "99.0"],
    ["sweep", str(SPEC), "--axes", "colour=1,2"],
    ["sweep", str(SPEC), "--axes", "alpha"],
    ["sweep", str(SPEC), "--axes", "h=ab,cd"],
    ["sweep", str(SPEC), "--axes", "alpha="],
])
def test_schema_violations_exit_two(tmp_path, capsys, argv):
    argv = argv + ["--out", str(tmp_path / "out")]
    assert cli.main(argv) == 2
    assert "schema error [" in capsys.readouterr().err


def test_usage_errors_share_exit_code_two(capsys):
    with pytest.raises(SystemExit) as err:
        cli.main(["run"])
    assert err.value.code == 2


def test_numerical_failure_exits_one(tmp_path, capsys):
    # An explicit scheme far beyond its stability limit overflows, and the
    # stability failure maps to exit code 1.
    rc = cli.main(["run", str(SPEC), "--theta", "0.0", "--dt", "0.00390625",
                   "--mode", "direct", "--out", str(tmp_path / "out")])
    assert rc == 1
    assert "numerical failure" in capsys.readouterr().err


def test_verify_prints_one_line_per_invariant(tmp_path, capsys):
    rc = cli.main(["verify", "verify-norms", "--out", str(tmp_path / "out")])
    assert rc == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if l.startswith("[")]
    assert lines, "no invariant lines printed"
    assert all(l.startswith("[PASS]") or l.startswith("[FAIL]") for l in lines)
    assert all("norms." in l for l in lines)
    assert (tmp_path / "out" / "verify-norms" / "summary.json").exists()


def test_verify_failure_exits_one(tmp_path, capsys, monkeypatch):
    def failing(seed=0):
        res = ExperimentResult("unit-fail", seed)
        res.add("unit.always_false", False, 1.0, "injected")
        return res

    monkeypatch.setitem(cli.EXPERIMENTS, "unit-fail", failing)
    rc = cli.main(["verify", "unit-fail", "--out", str(tmp_path / "out")])
    assert rc == 1
    captured = capsys.readouterr()
    assert "[FAIL] unit.always_false" in captured.out
    assert "unit.always_false" in captured.err


def test_sweep_runs_cartesian_product(tmp_path):
    out = tmp_path / "out"
    rc = cli.main(["sweep", str(SPEC), "--axes", "lambda=0.0,1.0",
                   "p=2.0,4.0", "--out", str(out)])
    assert rc == 0
    rows = _read_csv(out / "results.csv")
    assert len(rows) == 1 + 4
    summary = json.loads((out / "summary.json").read_text())
    assert summary["axes"] == {"lambda": [0.0, 1.0], "p": [2.0, 4.0]}
    combos = [r["combo"] for r in summary["runs"]]
    assert {tuple(c.values()) for c in combos} == {
        (0.0, 2.0), (0.0, 4.0), (1.0, 2.0), (1.0, 4.0)}


def test_sweep_threading_preserves_bytes(tmp_path, monkeypatch):
    argvs = {
        "serial": "1",
        "threaded": "4",
    }
    blobs = {}
    for name, threads in argvs.items():
        out = tmp_path / name
        monkeypatch.setenv("DESING_THREADS", threads)
        rc = cli.main(["sweep", str(SPEC), "--axes", "h=17,33",
                       "lambda=0.0,1.0", "--out", str(out)])
        assert rc == 0
        blobs[name] = (out / "results.csv").read_bytes()
    assert blobs["serial"] == blobs["threaded"]


def test_grid_flag_accepts_shape_per_token_in_2d(tmp_path):
    # On a two-dimensional chart one token is one shape, not a ladder.
    spec2d = Path(__file__).resolve().parents[1] / "specs" / "poincare2d.toml"
    out = tmp_path / "out"
    rc = cli.main(["run", str(spec2d), "--grid", "17,9", "--out", str(out)])
    assert rc == 0
    rows = _read_csv(out / "results.csv")
    assert len(rows) == 2
