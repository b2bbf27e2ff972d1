"""
End-to-end tests of the ``nonexp-lab`` command line.

Coverage areas
--------------
- Exit codes: 0 (all checks pass), 1 (a check fails), 2 (config errors)
- CSV and JSON reports, the fixpoint trajectory file
- Command-line overrides of config values
- Every subcommand on a small config
"""

import csv
import json

import pytest

from nonexp_lab.cli import main
from nonexp_lab.cli.reports import CSV_COLUMNS

TRANSLATION = {"op": "affine", "matrix": 1.0, "offset": [1.0]}
HALF_CONTRACTION = {"op": "affine", "matrix": 0.5, "offset": [1.0]}


def _config(tmp_path, payload, name="exp.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


@pytest.fixture
def witness_config(tmp_path):
    return _config(tmp_path, {
        "model": {"kind": "euclidean", "dim": 1},
        "metric": {"kind": "weighted", "theta": [0.0], "s": 2},
        "maps": {"f": TRANSLATION},
        "witness": {"kind": "ball_invariance", "r": 0.5},
        "members": 4,
        "budget": 100,
        "seed": 7,
    })


# ---------------------------------------------------------------------------
# 1) witness
# ---------------------------------------------------------------------------

def test_witness_writes_csv(witness_config, tmp_path):
    out = tmp_path / "run.csv"
    assert main(["witness", "--config", witness_config, "--out", str(out), "--quiet"]) == 0
    rows = _read_csv(out)
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 1 + 1 + 2 * 4
    assert rows[1][0] == "center_in_base_ball"
    assert all(row[CSV_COLUMNS.index("passed")] == "true" for row in rows[1:])


def test_witness_json_echoes_overrides(witness_config, tmp_path):
    out = tmp_path / "run.json"
    code = main(["witness", "--config", witness_config, "--out", str(out), "--format", "json",
                 "--members", "2", "--seed", "3", "--quiet"])
    assert code == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["command"] == "witness"
    assert report["config"]["members"] == 2
    assert report["config"]["seed"] == 3
    assert report["summary"]["checks"] == 5
    assert report["summary"]["failed"] == 0
    assert report["summary"]["params"]["M_f"] == pytest.approx(12.0)


def test_witness_center_only(tmp_path, witness_config):
    out = tmp_path / "center.json"
    code = main(["witness", "--config", witness_config, "--members", "0", "--out", str(out),
                 "--format", "json", "--quiet"])
    assert code == 0
    rows = json.loads(out.read_text(encoding="utf-8"))["rows"]
    assert [r["name"] for r in rows] == ["center_in_base_ball"]


def test_reports_are_reproducible(witness_config, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["witness", "--config", witness_config, "--out", str(a), "--quiet"])
    main(["witness", "--config", witness_config, "--out", str(b), "--quiet"])
    assert a.read_text(encoding="utf-8") == b.read_text(encoding="utf-8")


def _run_with_threads(config, tmp_path, threads, fmt):
    out = tmp_path / f"threads{threads}.{fmt}"
    assert main(["witness", "--config", config, "--out", str(out), "--format", fmt,
                 "--members", "12", "--threads", str(threads), "--quiet"]) == 0
    return out.read_text(encoding="utf-8")


@pytest.mark.parametrize("threads", [4, 8])
def test_csv_report_independent_of_thread_count(witness_config, tmp_path, threads):
    single = _run_with_threads(witness_config, tmp_path, 1, "csv")
    assert _run_with_threads(witness_config, tmp_path, threads, "csv") == single


@pytest.mark.parametrize("threads", [4, 8])
def test_json_report_independent_of_thread_count(witness_config, tmp_path, threads):
    single = json.loads(_run_with_threads(witness_config, tmp_path, 1, "json"))
    many = json.loads(_run_with_threads(witness_config, tmp_path, threads, "json"))
    assert many["config"].pop("threads") == threads
    assert single["config"].pop("threads") == 1
    for report in (single, many):
        report["config"].pop("output")
    assert many == single


# ---------------------------------------------------------------------------
# 2) fixpoint
# ---------------------------------------------------------------------------

def test_fixpoint_with_audit(tmp_path):
    config = _config(tmp_path, {
        "model": "euclidean",
        "maps": {"f": HALF_CONTRACTION},
        "fixpoint": {"x0": [0.0], "expected": [2.0], "audit": {"n_max": 2}},
        "budget": 100,
    })
    out = tmp_path / "fix.json"
    assert main(["fixpoint", "--config", config, "--out", str(out), "--format", "json",
                 "--quiet"]) == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    names = [r["name"] for r in report["rows"]]
    assert names == ["converged", "final_point", "converged", "step_gauge_bound", "unique_limit"]
    assert report["trajectory"][0] == {"iteration": 0, "residual": 1.0}
    assert report["summary"]["iterations"] == 34


def test_fixpoint_csv_writes_trajectory(tmp_path):
    config = _config(tmp_path, {"model": "euclidean", "maps": {"f": HALF_CONTRACTION},
                                "fixpoint": {"x0": [0.0]}})
    out = tmp_path / "fix.csv"
    assert main(["fixpoint", "--config", config, "--out", str(out), "--quiet"]) == 0
    trajectory = _read_csv(tmp_path / "fix.trajectory.csv")
    assert trajectory[0] == ["iteration", "residual"]
    assert trajectory[1] == ["0", "1"]


def test_fixpoint_of_witness_center(tmp_path):
    config = _config(tmp_path, {
        "model": "euclidean",
        "metric": {"kind": "weighted", "theta": [0.0], "s": 2},
        "maps": {"f": {"op": "witness_center", "f": TRANSLATION,
                       "witness": {"kind": "ball_invariance", "r": 0.5}}},
        "fixpoint": {"x0": [0.0], "theta": [0.0]},
        "budget": 100,
    })
    out = tmp_path / "center.json"
    assert main(["fixpoint", "--config", config, "--out", str(out), "--format", "json",
                 "--quiet"]) == 0
    names = [r["name"] for r in json.loads(out.read_text(encoding="utf-8"))["rows"]]
    assert names == ["converged", "ball_invariant", "iterates_in_ball"]


def test_translation_fails_to_converge(tmp_path):
    config = _config(tmp_path, {"model": "euclidean", "maps": {"f": TRANSLATION},
                                "fixpoint": {"x0": [0.0], "max_iter": 20}})
    assert main(["fixpoint", "--config", config, "--quiet"]) == 1


# ---------------------------------------------------------------------------
# 3) metric, verify-axioms, lipschitz-profile
# ---------------------------------------------------------------------------

def test_metric_between_constants(tmp_path):
    config = _config(tmp_path, {
        "model": "euclidean",
        "gauge": "log",
        "metric": {"kind": "series", "theta": [0.0], "expected": {"value": 0.5, "tol": 1e-9}},
        "maps": {"f": {"op": "constant", "p": [0.0]}, "g": {"op": "constant", "p": [1.0]}},
        "budget": 100,
    })
    out = tmp_path / "metric.json"
    assert main(["metric", "--config", config, "--out", str(out), "--format", "json",
                 "--quiet"]) == 0
    summary = json.loads(out.read_text(encoding="utf-8"))["summary"]
    assert summary["value"] == pytest.approx(0.5)
    assert summary["metric"]["gauge"] == "LogGauge"


def test_verify_axioms(tmp_path):
    config = _config(tmp_path, {"models": ["euclidean", {"kind": "l1", "dim": 2}],
                                "axioms": {"samples": 200}})
    out = tmp_path / "axioms.csv"
    assert main(["verify-axioms", "--config", config, "--out", str(out), "--quiet"]) == 0
    rows = _read_csv(out)
    assert [r[0] for r in rows[1:]] == ["EuclideanSpace(1):axioms", "L1Space(2):axioms"]


def test_lipschitz_profile(tmp_path):
    config = _config(tmp_path, {
        "model": "euclidean",
        "maps": {"f": {"op": "contract_toward", "gamma": 0.25, "f": {"op": "identity"}}},
        "profile": {"cloud": {"points": [[0.0], [0.75]]}, "levels": [1], "eps": 0.5,
                    "k_max": 7},
        "budget": 50,
    })
    out = tmp_path / "profile.json"
    assert main(["lipschitz-profile", "--config", config, "--out", str(out), "--format", "json",
                 "--quiet"]) == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["summary"]["net_sizes"] == {"2^-1": 2}
    names = [r["name"] for r in report["rows"]]
    assert "a=2^-1:z0:r=2^-7:patched_isometric" in names
    assert "a=2^-1:z1:patch_deviation" in names


# ---------------------------------------------------------------------------
# 4) Errors and console output
# ---------------------------------------------------------------------------

def test_missing_config_file(tmp_path, capsys):
    assert main(["metric", "--config", str(tmp_path / "absent.json")]) == 2
    assert "5100" in capsys.readouterr().err


def test_unknown_map_op(tmp_path, capsys):
    config = _config(tmp_path, {"model": "euclidean", "maps": {"f": {"op": "rotate"}},
                                "fixpoint": {}})
    assert main(["fixpoint", "--config", config]) == 2
    assert "5104" in capsys.readouterr().err


@pytest.mark.parametrize("command, payload", [
    ("lipschitz-profile", {"maps": {"f": {"op": "identity"}},
                           "profile": {"cloud": {"points": "abc"}}}),
    ("lipschitz-profile", {"maps": {"f": {"op": "identity"}},
                           "profile": {"cloud": "abc"}}),
    ("fixpoint", {"maps": {"f": {"op": "affine", "matrix": "abc"}}, "fixpoint": {}}),
    ("fixpoint", {"maps": {"f": {"op": "affine", "matrix": 0.5, "offset": [[1.0], "x"]}},
                  "fixpoint": {}}),
    ("metric", {"gauge": {"kind": "table", "ts": ["a", 1.0], "phis": [0.5, 1.0]},
                "metric": {"kind": "series"},
                "maps": {"f": {"op": "identity"}, "g": {"op": "identity"}}}),
])
def test_malformed_arrays_exit_with_two(tmp_path, capsys, command, payload):
    config = _config(tmp_path, {"model": "euclidean", **payload})
    assert main([command, "--config", config, "--quiet"]) == 2
    assert "5103" in capsys.readouterr().err


def test_affine_offset_of_wrong_length_exits_with_two(tmp_path, capsys):
    config = _config(tmp_path, {"model": "euclidean",
                                "maps": {"f": {"op": "affine", "matrix": 0.5,
                                               "offset": [1.0, 2.0]}},
                                "fixpoint": {}})
    assert main(["fixpoint", "--config", config, "--quiet"]) == 2
    assert "1000" in capsys.readouterr().err


def test_library_errors_exit_with_two(tmp_path):
    config = _config(tmp_path, {"model": "euclidean",
                                "maps": {"f": {"op": "affine", "matrix": 3.0}},
                                "fixpoint": {}})
    assert main(["fixpoint", "--config", config, "--quiet"]) == 2


def test_table_is_printed(witness_config, capsys):
    assert main(["witness", "--config", witness_config, "--members", "1"]) == 0
    err = capsys.readouterr().err
    assert "witness (3/3 passed)" in err
    assert "members_passed" in err
