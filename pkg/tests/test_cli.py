"""Tests for the command-line interface."""

import json

import pytest
from click.testing import CliRunner

from acalign import cli, dots, io, stimuli


@pytest.fixture
def runner():
    return CliRunner()


def _gen_pattern_file(tmp_path, runner, **kwargs):
    path = tmp_path / "pattern.json"
    args = ["gen-dots", "--recipe", "planted", "--seed", "0",
            "--out", str(path)]
    result = runner.invoke(cli.main, args, catch_exceptions=False)
    assert result.exit_code == 0
    return path


def test_gen_dots_writes_valid_pattern(tmp_path, runner):
    path = _gen_pattern_file(tmp_path, runner)
    pattern = io.load_document(path)
    assert pattern.n == 27


def test_gen_dots_stdout(runner):
    result = runner.invoke(cli.main, ["gen-dots", "--n", "10"],
                           catch_exceptions=False)
    assert result.exit_code == 0
    data = json.loads(result.output)
    assert len(data["points"]) == 10


def test_detect_dots_file_matches_in_process(tmp_path, runner):
    path = _gen_pattern_file(tmp_path, runner)
    out = tmp_path / "det.json"
    result = runner.invoke(cli.main, [
        "detect-dots", "--in", str(path), "--mode", "basic",
        "--out", str(out)], catch_exceptions=False)
    assert result.exit_code == 0
    pattern = io.load_document(path)
    expect = io.detections_to_bytes(dots.detect_basic(pattern))
    assert out.read_bytes() == expect


def test_detect_dots_schema_error_exits_2(tmp_path, runner):
    bad = tmp_path / "bad.json"
    bad.write_text(
        '{"domain": {"width": 10, "height": 10}, "points": [[1], [2, 2]]}')
    result = runner.invoke(cli.main, ["detect-dots", "--in", str(bad)])
    assert result.exit_code == 2
    assert "points[0]" in result.output or "points[0]" in (result.stderr or "")


def test_detect_dots_rejects_gabor_file(tmp_path, runner):
    path = tmp_path / "field.json"
    result = runner.invoke(cli.main, [
        "gen-gabor", "--kind", "negative", "--n", "20", "--out", str(path)],
        catch_exceptions=False)
    assert result.exit_code == 0
    result = runner.invoke(cli.main, ["detect-dots", "--in", str(path)])
    assert result.exit_code == 2


def test_gen_gabor_and_detect(tmp_path, runner):
    path = tmp_path / "pos.json"
    result = runner.invoke(cli.main, [
        "gen-gabor", "--kind", "positive", "--length", "10",
        "--jitter", "0", "--seed", "3", "--out", str(path)],
        catch_exceptions=False)
    assert result.exit_code == 0
    out = tmp_path / "det.json"
    result = runner.invoke(cli.main, [
        "detect-gabor", "--in", str(path), "--best", "--out", str(out)],
        catch_exceptions=False)
    assert result.exit_code == 0
    assert "best_log10_nfa" in result.output
    assert json.loads(out.read_text())


def test_mask_command(tmp_path, runner):
    path = _gen_pattern_file(tmp_path, runner)
    raw = runner.invoke(cli.main, [
        "detect-dots", "--in", str(path), "--mode", "basic"],
        catch_exceptions=False)
    masked = runner.invoke(cli.main, [
        "mask", "--in", str(path), "--mode", "basic"],
        catch_exceptions=False)
    assert masked.exit_code == 0
    assert len(json.loads(masked.output)) <= len(json.loads(raw.output))


def test_validate_h0(runner):
    result = runner.invoke(cli.main, [
        "validate-h0", "--detector", "basic", "--n", "40", "--trials", "30"],
        catch_exceptions=False)
    assert result.exit_code == 0
    assert result.output.startswith("PASS")


def test_experiment_writes_artifacts(tmp_path, runner):
    out = tmp_path / "exp"
    result = runner.invoke(cli.main, [
        "experiment", "--out-dir", str(out), "--seeds", "1",
        "--n", "100"], catch_exceptions=False)
    assert result.exit_code == 0
    for name in ("manifest.jsonl", "trials.csv", "curve.csv", "rates.csv",
                 "report.json", "curve.png", "rates.png"):
        assert (out / name).exists(), name


def test_figures_writes_report(tmp_path, runner):
    out = tmp_path / "figs"
    result = runner.invoke(cli.main, [
        "figures", "--out-dir", str(out), "--no-figures"])
    assert (out / "report.json").exists()
    report = json.loads((out / "report.json").read_text())
    assert {s["name"] for s in report["scenarios"]} >= {
        "masking_by_noise", "cluster_rejection", "grid_masking"}
