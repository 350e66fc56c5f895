import os

import pytest

from app import __version__
from app.cli.commands import (
    EXIT_IO,
    EXIT_OK,
    EXIT_SCENARIO,
    EXIT_SIMULATION,
    EXIT_USAGE,
    classify_error,
    format_error,
    report_error,
)
from app.core.errors import ChannelError, GeometryError, InvalidScenarioError, ScenarioError
from main import main

TWO_TRANSMITTERS = """\
name: two-tx
duration_s: 5.0
channels:
  - {id: data, frequency_hz: 2400000000.0, bandwidth_hz: 1000000.0, data_rate_bps: 1000000.0}
nodes:
  - id: a
    role: transmitter
    trajectory: {kind: static, position_m: [0.0, 0.0, 0.0]}
    antenna: {pattern: {kind: isotropic}}
    tx_channel: data
    generator: {packet_size_bits: 1024, interval: {kind: constant, interval_s: 1.0}, tx_power_w: 20.0}
  - id: b
    role: transmitter
    trajectory: {kind: static, position_m: [10.0, 0.0, 0.0]}
    antenna: {pattern: {kind: isotropic}}
    tx_channel: data
    generator: {packet_size_bits: 1024, interval: {kind: constant, interval_s: 1.0}, tx_power_w: 20.0}
"""


@pytest.fixture
def minimal_path(data_dir):
    return str(data_dir / "minimal_scenario.yaml")


def single_error_line(err):
    lines = [line for line in err.splitlines() if line.strip()]
    assert len(lines) == 1
    return lines[0]


def test_version(capsys):
    assert main(["version"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == f"apsim {__version__}"


def test_validate_ok(capsys, scenario_dir):
    assert main(["validate", str(scenario_dir / "baseline.yaml")]) == EXIT_OK
    assert "ok: scenario 'baseline' is valid" in capsys.readouterr().out


def test_validate_reports_parse_errors(capsys, data_dir):
    assert main(["validate", str(data_dir / "bad_speed.yaml")]) == EXIT_SCENARIO
    line = single_error_line(capsys.readouterr().err)
    assert line.startswith("apsim-error[scenario]: ")
    assert "speed" in line
    assert "line 29" in line


def test_validate_lists_violations(capsys, tmp_path):
    path = tmp_path / "two_tx.yaml"
    path.write_text(TWO_TRANSMITTERS, encoding="utf-8")
    assert main(["validate", str(path)]) == EXIT_SCENARIO
    captured = capsys.readouterr()
    assert "violation: exactly one transmitter is required, found 2" in captured.out
    assert "violation: at least one receiver is required" in captured.out
    assert single_error_line(captured.err).startswith("apsim-error[scenario]: ")


def test_missing_scenario_file_is_an_io_error(capsys, tmp_path):
    assert main(["validate", str(tmp_path / "absent.yaml")]) == EXIT_IO
    assert single_error_line(capsys.readouterr().err).startswith("apsim-error[io]: ")


def test_run_writes_to_out(capsys, tmp_path, minimal_path):
    out = tmp_path / "out"
    assert main(["run", minimal_path, "--out", str(out), "--trace", "--seed", "4"]) == EXIT_OK
    stdout = capsys.readouterr().out
    assert "Scenario 'minimal' (seed 4)" in stdout
    assert f"csv[rx]: {out / 'minimal_rx.csv'}" in stdout
    assert (out / "minimal_rx.csv").exists()
    assert (out / "minimal_trace.csv").exists()
    assert (out / "minimal_summary.txt").exists()
    assert f"scenario: {out / 'minimal_scenario.yaml'}" in stdout


def test_run_uses_results_env_var(capsys, results_dir, minimal_path):
    assert main(["run", minimal_path, "--window", "2.5"]) == EXIT_OK
    assert (results_dir / "minimal_rx.csv").exists()
    assert "2.5 s throughput windows" in capsys.readouterr().out


def test_run_no_jammer(capsys, tmp_path, scenario_dir):
    assert main(["run", str(scenario_dir / "baseline.yaml"), "--no-jammer", "--out", str(tmp_path)]) == EXIT_OK
    assert "sent 12, received 12, rejected 0, bit errors 0" in capsys.readouterr().out
    assert (tmp_path / "baseline-no-jammer_vehicle.csv").exists()


def test_run_rejects_bad_window(capsys, minimal_path, tmp_path):
    assert main(["run", minimal_path, "--window", "0", "--out", str(tmp_path)]) == EXIT_USAGE
    assert single_error_line(capsys.readouterr().err).startswith("apsim-error[usage]: ")


def test_compare(capsys, tmp_path, scenario_dir):
    args = ["compare", str(scenario_dir / "baseline.yaml"), "--antennas", "iso,dir", "--out", str(tmp_path)]
    assert main(args) == EXIT_OK
    stdout = capsys.readouterr().out
    assert "Ranking by cumulative bit errors (fewest first): dir, iso" in stdout
    assert (tmp_path / "baseline-dir_vehicle.csv").exists()
    assert (tmp_path / "baseline_compare_summary.txt").exists()


def test_compare_unknown_preset(capsys, minimal_path, tmp_path):
    assert main(["compare", minimal_path, "--antennas", "dish", "--out", str(tmp_path)]) == EXIT_SCENARIO
    assert "unknown antenna preset" in single_error_line(capsys.readouterr().err)


def test_compare_unknown_node(capsys, minimal_path, tmp_path):
    args = ["compare", minimal_path, "--antennas", "iso", "--node", "ghost", "--out", str(tmp_path)]
    assert main(args) == EXIT_SCENARIO
    assert "no node 'ghost'" in capsys.readouterr().err


def test_compare_bad_jobs(capsys, minimal_path, tmp_path):
    args = ["compare", minimal_path, "--antennas", "iso", "--jobs", "0", "--out", str(tmp_path)]
    assert main(args) == EXIT_USAGE


@pytest.mark.parametrize(
    "argv",
    [[], ["launch"], ["compare", "scenario.yaml"], ["run", "scenario.yaml", "--seed", "abc"]],
)
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as excinfo:
        main(argv)
    assert excinfo.value.code == EXIT_USAGE
    assert single_error_line(capsys.readouterr().err).startswith("apsim-error[usage]: ")


@pytest.mark.parametrize(
    "error, expected",
    [
        (ScenarioError("bad"), ("scenario", EXIT_SCENARIO)),
        (InvalidScenarioError(["x"]), ("scenario", EXIT_SCENARIO)),
        (GeometryError("zero-length direction"), ("geometry", EXIT_SIMULATION)),
        (ChannelError("noiseless channel"), ("channel", EXIT_SIMULATION)),
        (PermissionError("denied"), ("io", EXIT_IO)),
        (ValueError("nope"), ("usage", EXIT_USAGE)),
        (RuntimeError("boom"), ("internal", EXIT_SIMULATION)),
    ],
)
def test_classify_error(error, expected):
    assert classify_error(error) == expected


def test_diagnostics_are_single_lines(capsys):
    assert format_error("scenario", "first\nsecond   third") == "apsim-error[scenario]: first second third"
    assert report_error(KeyError("no node 'x'")) == EXIT_USAGE
    assert capsys.readouterr().err == "apsim-error[usage]: no node 'x'\n"


def test_results_dir_is_created(tmp_path, minimal_path, capsys):
    out = tmp_path / "a" / "b"
    assert main(["run", minimal_path, "--out", str(out)]) == EXIT_OK
    assert os.path.isdir(out)
