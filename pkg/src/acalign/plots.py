"""Matplotlib rendering of scenes, detections and report curves.

Figures are written to files next to the delimited report output; no
interactive backends are assumed.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Polygon

from .harness import BIN_EDGES, BinnedCurve, wilson_interval


def _nfa_color(log_nfa, lo, hi):
    """Red (most significant, smallest NFA) to blue (least significant)."""
    if hi <= lo:
        x = 0.0
    else:
        x = (log_nfa - lo) / (hi - lo)
    return (1.0 - x, 0.1, x)


def _rect_corners(det):
    ax, ay, bx, by = det.ax, det.ay, det.bx, det.by
    length = math.hypot(bx - ax, by - ay)
    if length <= 0:
        length = 1e-9
    ux, uy = (bx - ax) / length, (by - ay) / length
    vx, vy = -uy, ux
    h = det.width / 2.0
    return [
        (ax + vx * h, ay + vy * h),
        (bx + vx * h, by + vy * h),
        (bx - vx * h, by - vy * h),
        (ax - vx * h, ay - vy * h),
    ]


def plot_dot_scene(pattern, detections, path, title=None):
    fig, axis = plt.subplots(figsize=(6, 6 * pattern.height / pattern.width))
    axis.scatter(pattern.points[:, 0], pattern.points[:, 1], s=8, c="k")
    if detections:
        scores = [d.log_nfa for d in detections]
        lo, hi = min(scores), max(scores)
        for det in sorted(detections, key=lambda d: -d.log_nfa):
            axis.add_patch(Polygon(_rect_corners(det), closed=True, fill=False,
                                   edgecolor=_nfa_color(det.log_nfa, lo, hi),
                                   linewidth=1.2))
    axis.set_xlim(0, pattern.width)
    axis.set_ylim(0, pattern.height)
    axis.set_aspect("equal")
    axis.invert_yaxis()
    if title:
        axis.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_gabor_scene(field, detections, path, title=None, bar_len=None):
    """Elements drawn as oriented bars; detections as rectangles."""
    if bar_len is None:
        bar_len = 0.45 * field.default_rect_width()
    fig, axis = plt.subplots(figsize=(6, 6 * field.height / field.width))
    dx = np.cos(field.theta) * bar_len / 2.0
    dy = np.sin(field.theta) * bar_len / 2.0
    for (x, y), ddx, ddy in zip(field.xy, dx, dy):
        axis.plot([x - ddx, x + ddx], [y - ddy, y + ddy], color="k", lw=1.4)
    if detections:
        scores = [d.log_nfa for d in detections]
        lo, hi = min(scores), max(scores)
        for det in detections:
            axis.add_patch(Polygon(_rect_corners(det), closed=True, fill=False,
                                   edgecolor=_nfa_color(det.log_nfa, lo, hi),
                                   linewidth=1.2))
    axis.set_xlim(0, field.width)
    axis.set_ylim(0, field.height)
    axis.set_aspect("equal")
    axis.invert_yaxis()
    if title:
        axis.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_binned_curve(curve: BinnedCurve, path, title="Detection rate vs NFA"):
    centers, rates, errs = [], [], []
    for i, n in enumerate(curve.counts):
        if n == 0 or math.isnan(curve.means[i]):
            continue
        lo, hi = BIN_EDGES[i], BIN_EDGES[i + 1]
        if math.isinf(lo):
            c = hi - 0.5
        elif math.isinf(hi):
            c = lo + 0.5
        else:
            c = (lo + hi) / 2.0
        centers.append(c)
        rates.append(curve.means[i])
        errs.append(0.0 if math.isnan(curve.ci(i)) else curve.ci(i))
    fig, axis = plt.subplots(figsize=(6, 4))
    axis.errorbar(centers, rates, yerr=errs, fmt="o-", capsize=3)
    axis.axvline(0.0, color="gray", ls="--", lw=0.8)
    axis.set_xlabel("log10(NFA) bin")
    axis.set_ylabel("detection rate")
    axis.set_ylim(-0.05, 1.05)
    axis.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_rate_by_jitter(rate_by_condition, path,
                        title="Detection rate vs jitter"):
    lengths = sorted({L for (_, L) in rate_by_condition})
    fig, axis = plt.subplots(figsize=(6, 4))
    for L in lengths:
        js = sorted(j for (j, LL) in rate_by_condition if LL == L)
        rates, lows, highs = [], [], []
        for j in js:
            k, n = rate_by_condition[(j, L)]
            rates.append(k / n if n else math.nan)
            lo, hi = wilson_interval(k, n)
            lows.append(lo)
            highs.append(hi)
        axis.plot(js, rates, "o-", label=f"L={L}")
        axis.fill_between(js, lows, highs, alpha=0.12)
    axis.set_xlabel("jitter (rad)")
    axis.set_ylabel("detection rate")
    axis.set_ylim(-0.05, 1.05)
    axis.legend(fontsize=7, ncol=2)
    axis.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
