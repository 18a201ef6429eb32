"""
Command-line behaviour through typer's test runner.
"""
import json

import pytest
from typer.testing import CliRunner

from fsikit.cli.app import app

runner = CliRunner()


def test_alpha_prints_kmax():
    result = runner.invoke(app, ["alpha", "--d", "0.36", "--p", "0.18", "--terms", "20"])
    assert result.exit_code == 0, result.output
    assert "K_max" in result.output
    assert "1.30" in result.output


def test_alpha_rejects_bad_duty():
    result = runner.invoke(app, ["alpha", "--d", "1.5", "--p", "0.18"])
    assert result.exit_code == 2


def test_analyze_example(config_dir):
    result = runner.invoke(app, ["analyze", str(config_dir / "example1_unstable.yaml")])
    assert result.exit_code == 0, result.output
    assert "HBA" in result.output
    assert "SSAA" in result.output
    # Headline is the general form at the ESR-aware point; the simplified nominal index is secondary.
    assert "UNSTABLE" in result.output
    assert "acmc_type2_general" in result.output
    assert "nominal acmc_type2 index" in result.output


def test_analyze_voltage_loop_config(config_dir):
    result = runner.invoke(app, ["analyze", str(config_dir / "buck_voltage_loop.yaml")])
    assert result.exit_code == 0, result.output
    assert "m_i, m_v" in result.output


def test_analyze_missing_file(tmp_path):
    result = runner.invoke(app, ["analyze", str(tmp_path / "nope.yaml")])
    assert result.exit_code == 2


def test_json_error_record(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("topology: boost\nscheme: pcmc\n")
    result = runner.invoke(app, ["--json", "analyze", str(bad)])
    assert result.exit_code == 2
    record = json.loads(result.stdout)
    assert record["error_code"] == "CONFIG_ERROR"
    assert record["exit_code"] == 2
    assert record["errors"]


def _sweep(out, *extra):
    return runner.invoke(app, [
        "sweep", "--k", "1.3", "--d-range", "0.1:0.9:5", "--p-range", "0.1:1.0:4",
        "--out", str(out), "--workers", "1", *extra,
    ])


def test_sweep_writes_deterministic_files(tmp_path):
    first = _sweep(tmp_path / "a", "--curves", "0.18")
    second = _sweep(tmp_path / "b", "--curves", "0.18")
    assert first.exit_code == 0, first.output
    assert second.exit_code == 0, second.output
    for name in ("sweep.csv", "overlay.csv", "pm_region.csv", "kmax_curve_p_0.18.csv"):
        a = (tmp_path / "a" / name).read_bytes()
        assert a == (tmp_path / "b" / name).read_bytes()
    lines = (tmp_path / "a" / "sweep.csv").read_text().splitlines()
    assert lines[0] == "D,p,stable,kmax,straddle"
    assert len(lines) == 1 + 5 * 4


def test_pi_sweep_has_no_overlay(tmp_path):
    result = runner.invoke(app, [
        "sweep", "--scheme", "acmc_pi", "--k", "0.0232", "--d-range", "0.1:0.9:5",
        "--p-range", "0.01:0.05:3", "--out", str(tmp_path), "--workers", "1",
    ])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "sweep.csv").read_text().startswith("D,z,stable,ktildemax,straddle")
    assert not (tmp_path / "overlay.csv").exists()


def test_buck_sweep_writes_dkmax_curves(tmp_path):
    result = _sweep(tmp_path, "--topology", "buck", "--curves", "0.5")
    assert result.exit_code == 0, result.output
    assert (tmp_path / "dkmax_curve_p_0.5.csv").exists()


def test_sweep_rejects_bad_range(tmp_path):
    result = runner.invoke(app, ["sweep", "--k", "1.3", "--d-range", "0.1:0.9", "--out", str(tmp_path)])
    assert result.exit_code == 2


def test_simulate_writes_trace(config_dir, tmp_path):
    out = tmp_path / "trace.csv"
    result = runner.invoke(app, ["simulate", str(config_dir / "pcmc_buck.yaml"), "--periods", "20", "--out", str(out)])
    assert result.exit_code == 0, result.output
    lines = out.read_text().splitlines()
    assert lines[0].startswith("t,i_L,v_C,v_o,y,h,switch")
    assert len(lines) == 1 + 20 * 20


def test_sda_writes_eigenvalues(config_dir, tmp_path):
    out = tmp_path / "eig.csv"
    result = runner.invoke(app, ["sda", str(config_dir / "pcmc_buck.yaml"), "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert "verdict" in result.output
    lines = out.read_text().splitlines()
    assert lines[0] == "k,re,im,modulus" and len(lines) == 3


def test_report_agrees_on_stable_pcmc_buck(config_dir, tmp_path):
    out = tmp_path / "report.csv"
    result = runner.invoke(app, [
        "report", str(config_dir / "pcmc_buck.yaml"), "--periods", "200", "--out", str(out),
    ])
    assert result.exit_code == 0, result.output
    assert "agree: yes" in result.output
    assert out.read_text().startswith("method,stable,summary,error")


@pytest.mark.parametrize("flag", ["-v", "-vv"])
def test_verbosity_flags(flag):
    result = runner.invoke(app, [flag, "alpha", "--d", "0.5", "--p", "1.0"])
    assert result.exit_code == 0, result.output
