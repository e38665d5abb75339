import json
import subprocess
import sys

import pytest

from tfv import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def test_classify_uhs_en(capsys):
    code, rep, _ = run(capsys, "classify", "--field", "uhs_en", "--samples", "50")
    assert code == 0
    assert rep["results"][0]["verdict"]["flags"]["anti_torqued"] is True
    assert all(c["pass"] for c in rep["checks"])
    assert {"id", "pass", "max_residual", "tolerance", "witnesses"} <= set(rep["checks"][0])


def test_classify_rot2d_expected_negative(capsys):
    code, rep, _ = run(capsys, "classify", "--field", "rot2d", "--samples", "20")
    assert code == 0
    (check,) = rep["checks"]
    assert check["pass"] is False and check["expected_negative"] is True
    assert check["witnesses"]


def test_classify_sphere_runs_both_charts(capsys):
    code, rep, _ = run(capsys, "classify", "--field", "sphere_torse", "--samples", "20")
    assert code == 0
    assert [r["space"] for r in rep["results"]] == ["sphere(3)[north]", "sphere(3)[south]"]


@pytest.mark.parametrize("argv", [
    ["classify", "--field", "nosuch"],
    ["classify", "--field", "uhs_en", "--space", "hyperboloid"],
    ["classify", "--field", "uhs_en", "--n", "9"],
    ["classify", "--field", "uhs_en", "--samples", "0"],
    ["classify", "--field", "uhs_en", "--tol", "-1"],
    ["curvature", "--space", "klein"],
    ["flow", "--space", "uhs", "--start", "0,0,-1"],
    ["flow", "--space", "uhs", "--start", "0,1"],
    ["flow", "--field", "g_torqued", "--space", "uhs"],
    ["theorem", "--check", "torqued-obstruction", "--field", "uhs_en"],
    ["frobnicate"],
])
def test_config_errors_exit_2(capsys, argv):
    code, rep, err = run(capsys, *argv)
    assert code == 2 and rep is None
    assert "config error" in err


@pytest.mark.parametrize("space,target", [("uhs", -1.0), ("sphere", 1.0), ("euclidean", 0.0)])
def test_curvature(capsys, space, target):
    extra = ["--tol", "1e-9"] if space == "euclidean" else []
    code, rep, _ = run(capsys, "curvature", "--space", space, "--n", "3", "--samples", "30", *extra)
    assert code == 0
    for c in rep["checks"]:
        assert c["pass"] and c["expected_K"] == target


def test_curvature_tolerance_failure_exits_1(capsys):
    code, rep, _ = run(capsys, "curvature", "--space", "sphere", "--samples", "30", "--tol", "1e-18")
    assert code == 1 and not rep["all_met"]


def test_theorem_commands(capsys):
    code, rep, _ = run(capsys, "theorem", "--check", "torqued-obstruction", "--field", "hyp_torqued",
                       "--samples", "40")
    assert code == 0 and [c["id"] for c in rep["checks"]] == ["torqued-gradient", "torqued-closed"]
    code, rep, _ = run(capsys, "theorem", "--check", "anti-obstruction", "--field", "uhs_en", "--samples", "40")
    assert code == 0 and all(c["pass"] for c in rep["checks"])
    code, rep, _ = run(capsys, "theorem", "--check", "curvature-identity", "--space", "euclidean",
                       "--samples", "40")
    (c,) = rep["checks"]
    assert code == 0 and c["pass"] is False and c["expected_negative"] is True


def test_theorem_all_checks_skip_inapplicable(capsys):
    code, rep, _ = run(capsys, "theorem", "--space", "uhs", "--samples", "20")
    assert code == 0
    assert [c["id"] for c in rep["checks"]] == ["curvature-identity", "anti-gradient", "anti-closed"]


def test_flow_writes_csv(capsys, tmp_path):
    out = tmp_path / "trace.json"
    code, _, _ = run(capsys, "flow", "--out", str(out))
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["checks"][0]["max_residual"] < 1e-6
    lines = (tmp_path / "trace.csv").read_text().splitlines()
    assert lines[0] == "t,x1,x2,x3,f" and len(lines) == 502


def test_flow_uhs_end_point(capsys):
    code, rep, _ = run(capsys, "flow", "--space", "uhs", "--field", "x3", "--start", "0,0,1",
                       "--t-max", "1", "--step", "0.01")
    assert code == 0
    assert rep["results"]["end"] == pytest.approx([0.0, 0.0, 2.0])


def test_config_file_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nsamples = 12\nseed = 3\nt-max = 0.25\n\n")
    code, rep, _ = run(capsys, "flow", "--config", str(cfg), "--seed", "5")
    assert code == 0
    assert rep["config"]["samples"] == 12  # file over default
    assert rep["config"]["seed"] == 5  # flag over file
    assert rep["config"]["t_max"] == 0.25
    assert rep["results"]["t_end"] == pytest.approx(0.25)


@pytest.mark.parametrize("text", ["bogus = 1\n", "samples\n", "samples = many\n"])
def test_bad_config_file(capsys, tmp_path, text):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    assert run(capsys, "classify", "--config", str(cfg), "--field", "uhs_en")[0] == 2


def test_reports_are_byte_stable(tmp_path):
    outs = []
    for _ in range(2):
        cli.main(["classify", "--field", "hyp_torqued", "--samples", "30", "--out", str(tmp_path / "r.json")])
        outs.append((tmp_path / "r.json").read_bytes())
    assert outs[0] == outs[1]
    assert b"wall_clock" not in outs[0]


def test_timing_flag(capsys):
    _, rep, _ = run(capsys, "classify", "--field", "uhs_en", "--samples", "5", "--timing")
    assert rep["wall_clock_s"] >= 0


def test_threads_env_byte_stable(tmp_path):
    args = [sys.executable, "-m", "tfv", "classify", "--field", "hyp_torqued", "--samples", "40"]
    one = subprocess.run(args, capture_output=True, env={"TFV_THREADS": "1", "PATH": ""}, check=True).stdout
    four = subprocess.run(args, capture_output=True, env={"TFV_THREADS": "4", "PATH": ""}, check=True).stdout
    assert one == four


def test_suite_seed_robust(capsys, suite_checks):
    code, rep, _ = run(capsys, "suite", "--seed", "7")
    assert code == 0 and rep["all_met"]
    assert [(c["id"], c["pass"]) for c in rep["checks"]] == [(c.id, c.passed) for c in suite_checks]


def test_suite_tolerance_stress(capsys):
    code, rep, _ = run(capsys, "suite", "--tol", "1e-15")
    assert code == 1
    failed = [c for c in rep["checks"] if not c["expectation_met"]]
    assert failed and all(c["max_residual"] is not None and c["max_residual"] >= 1e-15 for c in failed)
