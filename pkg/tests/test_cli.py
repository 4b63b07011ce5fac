import json

import pytest
from click.testing import CliRunner

from squidmech.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


def test_device_derive_prints_zero_point_figures(runner):
    result = runner.invoke(main, ["device", "derive"])
    assert result.exit_code == 0
    assert "uPhi0" in result.output
    assert "15106" in result.output          # g0 at the reference gradient
    assert "13285" in result.output          # g0 from the device model


def test_unknown_subcommand_exits_2(runner):
    result = runner.invoke(main, ["frobnicate"])
    assert result.exit_code == 2


def test_malformed_device_file_exits_2(runner, tmp_path):
    bad = tmp_path / "device.json"
    bad.write_text('{"c_low": 4e-11\n  "omega_b": 1}')
    result = runner.invoke(main, ["device", "derive", "--device", str(bad)])
    assert result.exit_code == 2
    assert "line" in result.output


def test_device_file_with_missing_keys_exits_2(runner, tmp_path):
    bad = tmp_path / "device.json"
    bad.write_text('{"c_low": 4e-11}')
    result = runner.invoke(main, ["device", "derive", "--device", str(bad)])
    assert result.exit_code == 2
    assert "missing key" in result.output


def test_simulate_upconversion_and_fit(runner, tmp_path):
    out = tmp_path / "traces"
    result = runner.invoke(main, [
        "simulate", "upconversion", "--seed", "3", "--out", str(out)])
    assert result.exit_code == 0, result.output
    csv = out / "upconversion.csv"
    assert csv.exists() and csv.with_suffix(".json").exists()

    fit_out = tmp_path / "fits"
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{}')
    result = runner.invoke(main, [
        "fit", "lorentzian", str(csv), "--out", str(fit_out)])
    assert result.exit_code == 0, result.output
    doc = json.loads((fit_out / "fit_lorentzian.json").read_text())
    assert doc["converged"] is True
    assert "center_hz" in doc["params"]


def test_simulate_crossing_and_joint_fit(runner, tmp_path):
    out = tmp_path / "crossing"
    config = tmp_path / "config.json"
    config.write_text(json.dumps({
        "drive_count": 9, "trace_points": 151, "noise_sigma": 0.0}))
    result = runner.invoke(main, [
        "simulate", "crossing", "--config", str(config), "--out", str(out)])
    assert result.exit_code == 0, result.output
    files = sorted(out.glob("drive_*.csv"))
    assert len(files) == 9

    result = runner.invoke(main, ["fit", "crossing", *map(str, files)])
    assert result.exit_code == 0, result.output
    assert "g_hz" in result.output


def test_simulate_crossing_single_drive(runner, tmp_path):
    out = tmp_path / "one"
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"drive_count": 1, "trace_points": 32}))
    result = runner.invoke(main, [
        "simulate", "crossing", "--config", str(config), "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert len(sorted(out.glob("drive_*.csv"))) == 1


def test_fit_power_laws_from_points_file(runner, tmp_path):
    points = tmp_path / "points.json"
    alphas = [11.4, 12.8, 14.4, 16.1]
    points.write_text(json.dumps({
        "coupling": [{"alpha_d": a, "value_hz": 13e3 * a} for a in alphas],
        "stark": [{"alpha_d": a, "value_hz": 2 * 20e3 * a**2} for a in alphas],
    }))
    result = runner.invoke(main, ["fit", "power-laws", str(points)])
    assert result.exit_code == 0, result.output
    assert "g0_hz" in result.output

    broken = tmp_path / "broken.json"
    broken.write_text('{"coupling": []}')
    result = runner.invoke(main, ["fit", "power-laws", str(broken)])
    assert result.exit_code == 2


def test_pipeline_fig4_writes_report_and_exits_0(runner, tmp_path):
    out = tmp_path / "run"
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"sweep": {"trace_points": 101}}))
    result = runner.invoke(main, [
        "pipeline", "fig4", "--config", str(config), "--seed", "7",
        "--out", str(out)])
    assert result.exit_code == 0, result.output
    doc = json.loads((out / "report_fig4.json").read_text())
    assert doc["pipeline"] == "fig4"
    assert doc["duration_s"] is None
    assert all(q["pass"] for q in doc["quantities"])


def test_pipeline_failed_verdict_exits_1(runner, tmp_path):
    # a drive grid far above resonance yields a fit-rejected verdict
    res_hz = 5.408e9 - 583.53e6
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"sweep": {
        "trace_points": 101,
        "drive_points_hz": [res_hz + 50e6 + df for df in (-2e6, 0.0, 2e6)],
    }}))
    out = tmp_path / "run"
    result = runner.invoke(main, [
        "pipeline", "fig3", "--config", str(config), "--seed", "1",
        "--out", str(out)])
    assert result.exit_code == 1
    doc = json.loads((out / "report_fig3.json").read_text())
    assert doc["status"] == "fit_rejected"


def test_simulate_upconversion_json_format(runner, tmp_path):
    out = tmp_path / "traces"
    result = runner.invoke(main, [
        "simulate", "upconversion", "--seed", "3", "--out", str(out),
        "--format", "json"])
    assert result.exit_code == 0, result.output
    doc = json.loads((out / "upconversion.json").read_text())
    assert doc["kind"] == "power"
    assert len(doc["freq_hz"]) == len(doc["power"])


def test_simulate_flux_sweep_writes_traces(runner, tmp_path):
    out = tmp_path / "flux"
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"sweep": {
        "flux_points_phi0": [-0.3, -0.15, 0.0, 0.15, 0.3],
        "trace_points": 41, "noise_sigma": 0.0}}))
    result = runner.invoke(main, [
        "simulate", "flux-sweep", "--config", str(config), "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert len(sorted(out.glob("flux_*.csv"))) == 5


def test_pipeline_accepts_explicit_device_file(runner, tmp_path):
    from importlib import resources
    bundled = resources.files("squidmech.data").joinpath("paper_device.json")
    device = tmp_path / "device.json"
    device.write_text(bundled.read_text())
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"sweep": {"trace_points": 101}}))
    result = runner.invoke(main, [
        "pipeline", "fig4", "--device", str(device), "--config", str(config),
        "--seed", "7", "--out", str(tmp_path / "run")])
    assert result.exit_code == 0, result.output


def test_pipeline_traces_flag_writes_csvs(runner, tmp_path):
    out = tmp_path / "run"
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"sweep": {"trace_points": 64}}))
    result = runner.invoke(main, [
        "pipeline", "fig2c", "--config", str(config), "--seed", "2",
        "--out", str(out), "--traces"])
    assert result.exit_code == 0, result.output
    assert (out / "fig2c" / "upconversion.csv").exists()
