import io
import json
from pathlib import Path

import numpy as np
import pytest

from vimo.classes import ClassReport, check_monotone
from vimo.cli import ConfigError, ScanReport, emit_report, execute, main, parse_config, parse_records, run_config
from vimo.cli.config import SEED_ENV, schema_json
from vimo.core import negative_identity
from vimo.solver import SolveReport

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return p


SHRINK = """schema_version: 1
task: solve
instance:
  dim: 1
  operator: {kind: identity}
  phi: {kind: l1}
  f: [2.0]
"""


# ---------------------------------------------------------------------------
# exit codes


def test_shrinkage_config_solves(tmp_path):
    out = io.StringIO()
    rec = tmp_path / "r.jsonl"
    cfg = parse_config(SHRINK + f"output: {{records: {rec}}}\n")
    assert execute(cfg, out) == 0
    rep = parse_records(rec.read_text())[0]
    assert rep.converged and rep.y[0] == pytest.approx(1.0, abs=1e-6)
    assert "residual" in out.getvalue() and "iterations" in out.getvalue()


def test_unknown_operator_kind_is_a_schema_error(tmp_path, capsys):
    p = write(tmp_path, SHRINK.replace("kind: identity", "kind: wobbly"))
    assert run_config(p) == 1
    err = capsys.readouterr().err
    assert "line 5" in err and "operator.kind" in err


def test_non_monotone_check_fails_with_witness(tmp_path):
    out = io.StringIO()
    assert run_config(CONFIGS / "negative_identity.yaml", out) == 2
    assert "witness" in out.getvalue()


@pytest.mark.parametrize("text,fragment", [
    ("schema_version: 2\ntask: solve\n", "schema_version"),
    ("schema_version: 1\ntask: solve\n", "needs an instance"),
    ("schema_version: 1\ntask: residual-scan\n" + SHRINK.split("task: solve\n")[1], "scan"),
    (SHRINK + "bogus: 1\n", "bogus"),
    ("- a\n- b\n", "mapping"),
    ("a: [1, 2\n", "cannot parse"),
])
def test_schema_errors(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(text)


def test_dimension_mismatch_is_a_config_error(tmp_path):
    p = write(tmp_path, SHRINK.replace("f: [2.0]", "f: [2.0, 1.0]"))
    assert run_config(p) == 1


def test_missing_file():
    assert run_config("/nonexistent/cfg.yaml") == 1
    assert main(["solve", "/nonexistent/cfg.yaml"]) == 1


def test_max_iter_gives_exit_two(tmp_path):
    p = write(tmp_path, SHRINK)
    assert main(["solve", str(p), "--max-iter", "3", "--records", str(tmp_path / "r")]) == 2
    assert parse_records((tmp_path / "r").read_text())[0].status == "max_iter"


def test_bad_flag_value_is_usage_error(tmp_path, capsys):
    p = write(tmp_path, SHRINK)
    assert main(["solve", str(p), "--tol", "-1"]) == 1
    assert main(["frobnicate"]) == 1


def test_all_example_configs_succeed(tmp_path):
    for cfg in sorted(CONFIGS.glob("*.yaml")):
        expected = 2 if cfg.name == "negative_identity.yaml" else 0
        assert run_config(cfg, io.StringIO()) == expected, cfg.name


# ---------------------------------------------------------------------------
# tasks through the command line


def test_obstacle_demo_without_config(tmp_path):
    csv_path = tmp_path / "sol.csv"
    assert main(["obstacle-demo", "--csv", str(csv_path), "--format", "records"]) == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "x1,y,flux" and len(lines) == 18
    assert lines[0 + 1].split(",")[2] != "" and lines[5].split(",")[2] == ""


def test_truncation_through_method_flag(tmp_path):
    p = write(tmp_path, SHRINK.replace("f: [2.0]", "f: [5.0]"))
    r = tmp_path / "r"
    assert main(["solve", str(p), "--method", "truncation", "--records", str(r)]) == 0
    assert parse_records(r.read_text())[0].y[0] == pytest.approx(4.0, abs=1e-6)


def test_lift_and_galerkin_methods(tmp_path):
    p = write(tmp_path, SHRINK)
    for m in ("lift", "galerkin"):
        r = tmp_path / m
        assert main(["solve", str(p), "--method", m, "--records", str(r)]) == 0
        assert parse_records(r.read_text())[0].y[0] == pytest.approx(1.0, abs=1e-6)


def test_residual_scan_records(tmp_path):
    r = tmp_path / "scan"
    assert main(["residual-scan", str(CONFIGS / "scan.yaml"), "--records", str(r)]) == 0
    scan = parse_records(r.read_text())[0]
    assert isinstance(scan, ScanReport) and len(scan.points) == 25
    k = [tuple(p) for p in scan.points].index((1.0, 0.5))
    assert scan.residuals[k] == pytest.approx(0.0, abs=1e-12)
    assert min(scan.residuals) == scan.residuals[k]


def test_run_subcommand_matches_task_subcommand(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(CONFIGS / "projection.yaml"), "--records", str(a)]) == 0
    assert main(["solve", str(CONFIGS / "projection.yaml"), "--records", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


# ---------------------------------------------------------------------------
# seeds and determinism


def test_seed_precedence(tmp_path, monkeypatch):
    monkeypatch.delenv(SEED_ENV, raising=False)
    assert parse_config(SHRINK).resolved_seed() == 0
    monkeypatch.setenv(SEED_ENV, "7")
    assert parse_config(SHRINK).resolved_seed() == 7
    assert parse_config(SHRINK + "seed: 3\n").resolved_seed() == 3
    monkeypatch.setenv(SEED_ENV, "x")
    with pytest.raises(ConfigError):
        parse_config(SHRINK).resolved_seed()


def test_seed_flag_overrides_config(tmp_path):
    p = write(tmp_path, SHRINK.replace("task: solve", "task: check-classes") + "seed: 1\n")
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    main(["check-classes", str(p), "--records", str(a)])
    main(["check-classes", str(p), "--records", str(b), "--seed", "1"])
    main(["check-classes", str(p), "--records", str(c), "--seed", "2"])
    assert a.read_bytes() == b.read_bytes() != c.read_bytes()


@pytest.mark.parametrize("name", ["shrinkage.yaml", "classes.yaml", "scan.yaml", "truncation.yaml"])
def test_rerun_is_byte_identical(tmp_path, name):
    outs = []
    for k in range(2):
        r = tmp_path / f"{k}.jsonl"
        main(["run", str(CONFIGS / name), "--records", str(r)])
        outs.append(r.read_bytes())
    assert outs[0] == outs[1] and outs[0]


# ---------------------------------------------------------------------------
# emission


def small_report():
    return SolveReport(y=np.array([1.0, -0.0]), residual=1e-8, iterations=3, witness_w=np.zeros(2),
                       trace=[(1, 0.5), (2, 0.1), (3, 1e-8)], status="converged")


def test_table_has_residual_and_iterations():
    rows = dict(line.split(None, 1) for line in emit_report(small_report(), "table").splitlines())
    assert rows["iterations"] == "3" and rows["residual"] == "1e-08" and rows["status"] == "converged"


def test_csv_trace_rows():
    lines = emit_report(small_report(), "csv").splitlines()
    assert lines == ["iteration,residual", "1,0.5", "2,0.1", "3,1e-08"]


def test_failed_class_record_carries_witness_coordinates():
    rep = check_monotone(negative_identity(1), [(np.array([1.0]), np.array([0.0]))])
    rec = json.loads(emit_report(rep, "records"))
    assert rec["verdict"] == "fail" and rec["witness"]["y1"] == [1.0] and rec["witness"]["y2"] == [0.0]


def test_records_round_trip():
    reps = [small_report(), check_monotone(negative_identity(1), [(np.array([1.0]), np.array([0.0]))]),
            ScanReport(np.array([[0.0, 1.0]]), [float("inf")], [False])]
    text = "".join(emit_report(r, "records") for r in reps)
    assert parse_records(text) == reps
    assert "-0.0" not in text


def test_unknown_format_and_record():
    with pytest.raises(ValueError):
        emit_report(small_report(), "xml")
    with pytest.raises(ValueError):
        parse_records('{"record": "other"}')
    with pytest.raises(TypeError):
        emit_report(object(), "table")


def test_class_report_csv_and_schema():
    rep = ClassReport("x", "pass", 0.5, 10)
    assert emit_report(rep, "csv").splitlines() == ["check,verdict,margin,samples_used", "x,pass,0.5,10"]
    schema = json.loads(schema_json())
    assert "schema_version" in schema["properties"]
