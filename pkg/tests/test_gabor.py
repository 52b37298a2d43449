"""Tests for the Gabor-field alignment detector."""

import math

import numpy as np
import pytest

from acalign import gabor, stats, stimuli
from acalign.gabor import GaborField


def _field_from_record(record):
    return record.field


def test_field_normalizes_theta():
    f = GaborField(100, 100, np.array([[10.0, 10.0], [20.0, 20.0]]),
                   np.array([3.5, -0.2]))
    assert np.all((f.theta >= 0) & (f.theta < math.pi))
    assert f.n == 2
    assert f.default_rect_width() == pytest.approx(100 / math.sqrt(2))


def test_field_validation():
    with pytest.raises(ValueError):
        GaborField(100, 100, np.zeros((2, 2)), np.zeros(3))
    with pytest.raises(ValueError):
        GaborField(-1, 100, np.zeros((2, 2)), np.zeros(2))


def test_angle_distance_wraps_mod_pi():
    assert gabor.angle_distance(0.0, math.pi) == pytest.approx(0.0)
    assert gabor.angle_distance(0.05, math.pi - 0.05) == pytest.approx(0.1)
    assert gabor.angle_distance(0.0, math.pi / 2) == pytest.approx(math.pi / 2)


def test_tau_aligned():
    assert gabor.tau_aligned(0.01, 0.0, math.pi / 16)
    assert gabor.tau_aligned(math.pi - 0.01, 0.0, math.pi / 16)
    assert not gabor.tau_aligned(0.5, 0.0, math.pi / 16)
    with pytest.raises(ValueError):
        gabor.tau_aligned(0.0, 0.0, 2.0)


def test_detects_planted_contour():
    spec = stimuli.StimulusSpec(kind="positive", n=200, length=10,
                                jitter=0.0, seed=11)
    record = stimuli.generate(spec)
    report = gabor.detect_gabor(record.field)
    assert report.best_log_nfa < -3
    assert report.best is not None
    assert len(report.detections) >= 1
    planted = set(record.truth.members)
    assert planted <= set(report.detections[0].members)


def test_negative_field_reports_best_without_detections():
    spec = stimuli.StimulusSpec(kind="negative", n=200, seed=5)
    record = stimuli.generate(spec)
    report = gabor.detect_gabor(record.field)
    assert math.isfinite(report.best_log_nfa)
    assert report.best is not None
    # best is tracked even when nothing crosses the threshold
    assert all(d.log_nfa < 0 for d in report.detections)


def test_nfa_matches_direct_formula():
    spec = stimuli.StimulusSpec(kind="positive", n=200, length=10,
                                jitter=0.0, seed=2)
    record = stimuli.generate(spec)
    field = record.field
    report = gabor.detect_gabor(field)
    det = report.detections[0]
    log_tests = math.log10(field.n * (field.n - 1) / 2.0
                           * len(gabor.DEFAULT_TAUS))
    tail = stats.log10_binom_tail(det.n_inside, det.k_aligned,
                                  2.0 * det.tau / math.pi)
    assert det.log_nfa == pytest.approx(log_tests + tail, abs=1e-9)


def test_rect_width_override_changes_counts():
    spec = stimuli.StimulusSpec(kind="positive", n=200, length=8,
                                jitter=0.0, seed=3)
    field = stimuli.generate(spec).field
    wide = gabor.detect_gabor(field, rect_width=3 * field.default_rect_width())
    default = gabor.detect_gabor(field)
    assert wide.best_log_nfa != default.best_log_nfa


def test_rescorer_reproduces_score():
    spec = stimuli.StimulusSpec(kind="positive", n=200, length=10,
                                jitter=0.0, seed=4)
    field = stimuli.generate(spec).field
    det = gabor.detect_gabor(field).detections[0]
    rescore = gabor.make_rescorer(field, det)
    assert rescore(frozenset(det.members)) == pytest.approx(det.log_nfa,
                                                            abs=1e-9)
    reduced = rescore(frozenset(list(det.members)[:3]))
    assert reduced > det.log_nfa
