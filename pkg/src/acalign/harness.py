"""Batch experiment runner and statistical validator.

Three jobs:

* ``h0_montecarlo``  -- empirical check of the false-alarm bound: the
  mean number of meaningful raw candidates per noise sample must not
  exceed epsilon (within 2 s / sqrt(trials) of sampling slack).
* ``run_dataset``    -- per-stimulus best NFA over a generated manifest,
  aggregated into NFA-binned detection-rate curves and per-jitter /
  per-length tables.
* ``figure_suite``   -- named assertions over reconstructed scene types
  (masking by noise, border effect, cluster rejection, grid masking,
  redundancy removal).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import dots, gabor, masking, stimuli
from .stats import is_meaningful

BIN_EDGES = (-math.inf, -5.0, -4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, math.inf)


@dataclass(frozen=True)
class MonteCarloResult:
    detector: str
    n: int
    trials: int
    epsilon: float
    mean: float
    std: float
    ci: float  # 2 s / sqrt(trials)

    @property
    def passed(self) -> bool:
        return self.mean - self.ci <= self.epsilon


def _count_meaningful(detector: str, rng_seed: int, n: int, domain: float,
                      epsilon: float) -> int:
    if detector in ("basic", "refined"):
        pattern = stimuli.gen_dot_scene("noise", seed=rng_seed, n=n, domain=domain)
        return len(dots.detect(pattern, mode=detector, epsilon=epsilon))
    if detector == "gabor":
        spec = stimuli.StimulusSpec(kind="negative", n=n, domain_width=domain,
                                    domain_height=domain, seed=rng_seed)
        record = stimuli.gen_negative(spec)
        return len(gabor.detect_gabor(record.field, epsilon=epsilon).detections)
    raise ValueError(f"unknown detector {detector!r}")


def h0_montecarlo(detector: str, n: int, trials: int, epsilon: float = 1.0,
                  seed: int = 0, domain: float = 512.0) -> MonteCarloResult:
    """Mean count of meaningful raw candidates over noise samples."""
    if trials < 30:
        raise ValueError("at least 30 trials are required")
    root = np.random.default_rng(seed)
    seeds = root.integers(0, 2**63 - 1, size=trials)
    counts = np.array([
        _count_meaningful(detector, int(s), n, domain, epsilon) for s in seeds
    ], dtype=float)
    mean = float(counts.mean())
    std = float(counts.std(ddof=1)) if trials > 1 else 0.0
    return MonteCarloResult(detector=detector, n=n, trials=trials,
                            epsilon=epsilon, mean=mean, std=std,
                            ci=2.0 * std / math.sqrt(trials))


# ---------------------------------------------------------------------------
# Dataset runs


@dataclass(frozen=True)
class TrialResult:
    stimulus_id: str
    label: str               # "positive" | "negative"
    length: int
    jitter: float
    best_log_nfa: float
    answer: bool             # best NFA < epsilon
    localization_error: float | None = None


@dataclass(frozen=True)
class BinnedCurve:
    """Detection-rate statistics over the 9 log10(NFA) bins."""

    edges: tuple = BIN_EDGES
    counts: tuple = ()
    means: tuple = ()
    stds: tuple = ()

    @staticmethod
    def from_trials(trials: Sequence[TrialResult]) -> "BinnedCurve":
        values = [[] for _ in range(len(BIN_EDGES) - 1)]
        for tr in trials:
            values[bin_index(tr.best_log_nfa)].append(1.0 if tr.answer else 0.0)
        counts, means, stds = [], [], []
        for vs in values:
            counts.append(len(vs))
            if vs:
                arr = np.array(vs)
                means.append(float(arr.mean()))
                stds.append(float(arr.std(ddof=1)) if len(vs) > 1 else 0.0)
            else:
                means.append(math.nan)
                stds.append(math.nan)
        return BinnedCurve(counts=tuple(counts), means=tuple(means),
                           stds=tuple(stds))

    def ci(self, i: int) -> float:
        if self.counts[i] == 0:
            return math.nan
        return 2.0 * self.stds[i] / math.sqrt(self.counts[i])


def bin_index(log_nfa: float) -> int:
    """Index of the log10(NFA) bin; the partition is exhaustive/exclusive."""
    for i in range(len(BIN_EDGES) - 1):
        if BIN_EDGES[i] <= log_nfa < BIN_EDGES[i + 1]:
            return i
    return len(BIN_EDGES) - 2  # +inf lands in the last bin


def point_segment_distance(px, py, x1, y1, x2, y2) -> float:
    vx, vy = x2 - x1, y2 - y1
    len2 = vx * vx + vy * vy
    if len2 <= 0:
        return math.hypot(px - x1, py - y1)
    t = max(0.0, min(1.0, ((px - x1) * vx + (py - y1) * vy) / len2))
    return math.hypot(px - (x1 + t * vx), py - (y1 + t * vy))


def run_trial(record: stimuli.StimulusRecord, stimulus_id: str,
              epsilon: float = 1.0, rect_width: float | None = None) -> TrialResult:
    report = gabor.detect_gabor(record.field, rect_width=rect_width,
                                epsilon=epsilon)
    answer = is_meaningful(report.best_log_nfa, epsilon)
    loc_err = None
    if record.truth is not None and report.best is not None:
        mx = (report.best.ax + report.best.bx) / 2.0
        my = (report.best.ay + report.best.by) / 2.0
        loc_err = point_segment_distance(
            mx, my, record.truth.x1, record.truth.y1,
            record.truth.x2, record.truth.y2)
    return TrialResult(
        stimulus_id=stimulus_id,
        label="positive" if record.spec.kind == "positive" else "negative",
        length=record.spec.length, jitter=record.spec.jitter,
        best_log_nfa=report.best_log_nfa, answer=answer,
        localization_error=loc_err)


@dataclass
class DatasetReport:
    trials: list[TrialResult]
    curve: BinnedCurve
    rate_by_condition: dict           # (jitter, length) -> (k, n)
    skipped: list[str] = field(default_factory=list)


def run_dataset(records: Iterable, epsilon: float = 1.0,
                rect_width: float | None = None) -> DatasetReport:
    """Run the Gabor detector over stimulus records.

    ``records`` yields StimulusRecord objects or (line, record-or-error)
    pairs as produced by io.read_manifest; malformed rows are counted
    and skipped.
    """
    trials: list[TrialResult] = []
    skipped: list[str] = []
    for item in records:
        if isinstance(item, tuple):
            lineno, rec = item
            if isinstance(rec, Exception):
                skipped.append(str(rec))
                continue
            sid = f"row{lineno}"
        else:
            rec = item
            sid = f"seed{rec.spec.seed}-J{rec.spec.jitter:.3f}-L{rec.spec.length}"
        trials.append(run_trial(rec, sid, epsilon, rect_width))
    rate = {}
    for tr in trials:
        if tr.label != "positive":
            continue
        k, n = rate.get((tr.jitter, tr.length), (0, 0))
        rate[(tr.jitter, tr.length)] = (k + (1 if tr.answer else 0), n + 1)
    return DatasetReport(trials=trials, curve=BinnedCurve.from_trials(trials),
                         rate_by_condition=rate, skipped=skipped)


def wilson_interval(k: int, n: int, z: float = 1.96) -> tuple[float, float]:
    if n == 0:
        return (0.0, 1.0)
    phat = k / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def write_trials_csv(path, trials: Sequence[TrialResult]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stimulus_id", "label", "length", "jitter",
                         "best_log10_nfa", "answer", "localization_error"])
        for tr in trials:
            writer.writerow([
                tr.stimulus_id, tr.label, tr.length, f"{tr.jitter:.12g}",
                f"{tr.best_log_nfa:.12g}", int(tr.answer),
                "" if tr.localization_error is None
                else f"{tr.localization_error:.12g}"])


def write_curve_csv(path, curve: BinnedCurve) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_low", "bin_high", "trials", "rate", "ci_half"])
        for i in range(len(curve.counts)):
            writer.writerow([
                f"{BIN_EDGES[i]:.12g}", f"{BIN_EDGES[i+1]:.12g}",
                curve.counts[i],
                "" if math.isnan(curve.means[i]) else f"{curve.means[i]:.12g}",
                "" if math.isnan(curve.ci(i)) else f"{curve.ci(i):.12g}"])


def write_rate_csv(path, rate_by_condition: dict) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["jitter", "length", "detections", "trials", "rate",
                         "wilson_low", "wilson_high"])
        for (jitter, length) in sorted(rate_by_condition):
            k, n = rate_by_condition[(jitter, length)]
            lo, hi = wilson_interval(k, n)
            writer.writerow([f"{jitter:.12g}", length, k, n,
                             f"{k / n:.12g}" if n else "",
                             f"{lo:.12g}", f"{hi:.12g}"])


# ---------------------------------------------------------------------------
# Figure scenario suite


def _axis_angle(det) -> float:
    return math.atan2(det.by - det.ay, det.bx - det.ax) % math.pi


def _is_horizontal(det, tol=0.05) -> bool:
    a = _axis_angle(det)
    return a < tol or a > math.pi - tol

def _is_vertical(det, tol=0.05) -> bool:
    return abs(_axis_angle(det) - math.pi / 2) < tol


def scenario_masking_by_noise(seed: int = 0) -> dict:
    """A planted alignment is detected in sparse noise, lost in dense noise."""
    sparse = stimuli.gen_dot_scene("planted", seed=seed, n_aligned=7, n_noise=20)
    dense_pts = np.vstack([
        sparse.points,
        np.random.default_rng(seed + 1).uniform(0.0, sparse.width, size=(600, 2)),
    ])
    dense = dots.DotPattern(sparse.width, sparse.height, dense_pts)
    det_sparse = dots.detect_refined(sparse)
    det_dense = dots.detect_refined(dense)
    return {
        "name": "masking_by_noise",
        "pass": len(det_sparse) > 0 and len(det_dense) == 0,
        "sparse_detections": len(det_sparse),
        "dense_detections": len(det_dense),
        "scenes": {"sparse": (sparse, det_sparse), "dense": (dense, det_dense)},
    }


def scenario_border_effect(seed: int = 0) -> dict:
    """No refined detection hugging the border of a dense uniform block."""
    pattern = stimuli.gen_dot_scene("density_step", seed=seed)
    detections = dots.detect_refined(pattern)
    size = pattern.width * 0.45
    x0 = (pattern.width - size) / 2.0
    x1 = x0 + size
    border_hits = []
    for det in detections:
        mx, my = (det.ax + det.bx) / 2.0, (det.ay + det.by) / 2.0
        d_edge = min(abs(mx - x0), abs(mx - x1), abs(my - x0), abs(my - x1))
        if d_edge <= 2.0 * det.width:
            border_hits.append(det)
    return {
        "name": "border_effect",
        "pass": len(border_hits) == 0,
        "detections": len(detections),
        "border_detections": len(border_hits),
        "scenes": {"block": (pattern, detections)},
    }


def scenario_cluster_rejection(seed: int = 0) -> dict:
    """Two clusters: the basic detector fires, the refined one does not."""
    pattern = stimuli.gen_dot_scene("clusters", seed=seed)
    det_basic = dots.detect_basic(pattern)
    det_refined = dots.detect_refined(pattern)
    return {
        "name": "cluster_rejection",
        "pass": len(det_basic) > 0 and len(det_refined) == 0,
        "basic_detections": len(det_basic),
        "refined_detections": len(det_refined),
        "scenes": {"clusters": (pattern, det_basic)},
    }


def scenario_redundancy_removal(seed: int = 0) -> dict:
    """Masking reduces raw detections to one rectangle per alignment."""
    rng = np.random.default_rng(seed)
    domain = 512.0
    segs = [((60.0, 80.0), (420.0, 120.0)), ((100.0, 420.0), (430.0, 380.0))]
    pts = []
    for (x1, y1), (x2, y2) in segs:
        ts = np.linspace(0.0, 1.0, 10)
        pts.append(np.stack([x1 + ts * (x2 - x1), y1 + ts * (y2 - y1)], axis=1))
    pts.append(rng.uniform(0.0, domain, size=(25, 2)))
    pattern = dots.DotPattern(domain, domain, np.vstack(pts))
    raw = dots.detect_refined(pattern)
    accepted = masking.masking_filter(masking.from_dot_detections(pattern, raw))
    ok = 0
    for (x1, y1), (x2, y2) in segs:
        seg_angle = math.atan2(y2 - y1, x2 - x1) % math.pi
        if any(abs((_axis_angle(a.detection) - seg_angle + math.pi / 2) % math.pi
                   - math.pi / 2) < 0.1 for a in accepted):
            ok += 1
    return {
        "name": "redundancy_removal",
        "pass": len(raw) > len(accepted) and len(accepted) == len(segs)
                and ok == len(segs),
        "raw_detections": len(raw),
        "accepted": len(accepted),
        "scenes": {"raw": (pattern, raw),
                   "masked": (pattern, [a.detection for a in accepted])},
    }


def scenario_grid_masking(m: int = 10) -> dict:
    """Grid: masking keeps both families, exclusion starves one."""
    pattern = stimuli.gen_dot_scene("grid", m=m)
    raw = dots.detect_refined(pattern)
    cands = masking.from_dot_detections(pattern, raw)
    kept = masking.masking_filter(cands)
    excl = masking.exclusion_filter(masking.from_dot_detections(pattern, raw))
    kept_h = sum(1 for c in kept if _is_horizontal(c.detection))
    kept_v = sum(1 for c in kept if _is_vertical(c.detection))
    excl_h = sum(1 for c in excl if _is_horizontal(c.detection))
    excl_v = sum(1 for c in excl if _is_vertical(c.detection))
    return {
        "name": "grid_masking",
        "pass": kept_h >= m and kept_v >= m and (excl_h == 0 or excl_v == 0),
        "masking_horizontal": kept_h,
        "masking_vertical": kept_v,
        "exclusion_horizontal": excl_h,
        "exclusion_vertical": excl_v,
        "accepted": kept,
        "scenes": {"masking": (pattern, [c.detection for c in kept]),
                   "exclusion": (pattern, [c.detection for c in excl])},
    }


def figure_suite(seed: int = 0) -> dict:
    """All figure scenarios; overall pass iff every assertion holds."""
    results = [
        scenario_masking_by_noise(seed),
        scenario_border_effect(seed),
        scenario_cluster_rejection(seed),
        scenario_redundancy_removal(seed),
        scenario_grid_masking(),
    ]
    return {
        "pass": all(r["pass"] for r in results),
        "scenarios": results,
    }


def suite_summary(report: dict) -> dict:
    """JSON-friendly view of a figure_suite report (scenes stripped)."""
    return {
        "pass": report["pass"],
        "scenarios": [
            {k: v for k, v in r.items() if k not in ("scenes", "accepted")}
            for r in report["scenarios"]
        ],
    }
