"""Tests for the Monte-Carlo and dataset harness."""

import math

import numpy as np
import pytest

from acalign import harness, io, stimuli
from acalign.harness import BIN_EDGES, BinnedCurve, TrialResult


def test_bin_edges_partition_the_line():
    assert len(BIN_EDGES) == 10  # 9 bins
    assert math.isinf(BIN_EDGES[0]) and BIN_EDGES[0] < 0
    assert math.isinf(BIN_EDGES[-1])
    # strictly increasing
    assert all(a < b for a, b in zip(BIN_EDGES, BIN_EDGES[1:]))


@pytest.mark.parametrize("value,expected_unique", [
    (-100.0, True), (-5.0, True), (-0.5, True), (0.0, True),
    (1.5, True), (2.0, True), (1e9, True),
])
def test_every_value_in_exactly_one_bin(value, expected_unique):
    hits = [i for i in range(len(BIN_EDGES) - 1)
            if BIN_EDGES[i] <= value < BIN_EDGES[i + 1]]
    assert len(hits) == 1
    assert harness.bin_index(value) == hits[0]


def test_point_segment_distance():
    assert harness.point_segment_distance(0, 1, 0, 0, 10, 0) == pytest.approx(1)
    assert harness.point_segment_distance(-3, 4, 0, 0, 10, 0) == pytest.approx(5)
    assert harness.point_segment_distance(5, 0, 5, 0, 5, 0) == 0.0


def test_wilson_interval():
    assert harness.wilson_interval(0, 0) == (0.0, 1.0)
    lo, hi = harness.wilson_interval(5, 10)
    assert 0 < lo < 0.5 < hi < 1
    lo, hi = harness.wilson_interval(10, 10)
    assert hi == pytest.approx(1.0) and lo > 0.6


def test_h0_montecarlo_small():
    res = harness.h0_montecarlo("basic", n=40, trials=30, seed=1)
    assert res.mean >= 0
    assert res.passed  # uniform noise stays under epsilon on average
    with pytest.raises(ValueError):
        harness.h0_montecarlo("basic", n=40, trials=5)
    with pytest.raises(ValueError):
        harness.h0_montecarlo("sobel", n=40, trials=30)


def test_run_trial_positive():
    rec = stimuli.generate(stimuli.StimulusSpec(
        kind="positive", n=200, length=10, jitter=0.0, seed=0))
    tr = harness.run_trial(rec, "s0")
    assert tr.label == "positive"
    assert tr.answer
    assert tr.localization_error is not None
    assert tr.localization_error < 4 * rec.field.default_rect_width()


def test_run_dataset_handles_manifest_errors(tmp_path):
    recs = [stimuli.generate(stimuli.StimulusSpec(
        kind="positive", n=60, length=6, jitter=0.0, seed=s))
        for s in (0, 1)]
    path = tmp_path / "manifest.jsonl"
    io.write_manifest(path, recs)
    with open(path, "a", encoding="utf-8") as fh:
        fh.write('{"broken": true}\n')
    report = harness.run_dataset(io.read_manifest(path))
    assert len(report.trials) == 2
    assert len(report.skipped) == 1
    assert (0.0, 6) in report.rate_by_condition


def test_binned_curve_from_trials():
    trials = [
        TrialResult("a", "positive", 5, 0.0, -3.5, True),
        TrialResult("b", "positive", 5, 0.0, -3.2, True),
        TrialResult("c", "positive", 5, 0.0, 0.5, False),
    ]
    curve = BinnedCurve.from_trials(trials)
    assert sum(curve.counts) == 3
    i = harness.bin_index(-3.5)
    assert curve.counts[i] == 2 and curve.means[i] == 1.0
    j = harness.bin_index(0.5)
    assert curve.means[j] == 0.0


def test_csv_writers(tmp_path):
    trials = [TrialResult("a", "positive", 5, 0.0, -3.5, True, 1.0)]
    curve = BinnedCurve.from_trials(trials)
    harness.write_trials_csv(tmp_path / "t.csv", trials)
    harness.write_curve_csv(tmp_path / "c.csv", curve)
    harness.write_rate_csv(tmp_path / "r.csv", {(0.0, 5): (1, 1)})
    for name in ("t.csv", "c.csv", "r.csv"):
        text = (tmp_path / name).read_text()
        assert len(text.splitlines()) >= 2  # header + data


def test_scenario_cluster_rejection():
    r = harness.scenario_cluster_rejection(seed=0)
    assert r["pass"]
    assert r["basic_detections"] > 0
    assert r["refined_detections"] == 0


def test_scenario_grid_masking():
    r = harness.scenario_grid_masking()
    assert r["pass"]
    assert r["masking_horizontal"] >= 10
    assert r["masking_vertical"] >= 10


def test_scenario_redundancy_removal():
    r = harness.scenario_redundancy_removal(seed=0)
    assert r["pass"]
    assert r["raw_detections"] > r["accepted"]


def test_suite_summary_shape():
    report = {"pass": True, "scenarios": [
        {"name": "x", "pass": True, "scenes": {}, "extra": 1}]}
    summary = harness.suite_summary(report)
    assert summary["pass"] is True
    assert summary["scenarios"][0]["name"] == "x"
    assert "scenes" not in summary["scenarios"][0]
