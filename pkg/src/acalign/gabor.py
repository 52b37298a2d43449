"""Alignment detector for Gabor fields.

Positions are only used to decide which elements fall inside a candidate
rectangle; the score itself is purely orientation-based: the number of
elements whose orientation matches the rectangle axis within a precision
tau, against the hypothesis of i.i.d. uniform orientations in [0, pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .stats import log10_binom_tail, log10_binom_tail_arr

GEOM_TOL = 1e-9

# Angular precision family.  Dyadic, like the dot-detector width family;
# the lower end (pi/64) is what lets a clean 10-element alignment among
# 200 reach NFA ~ 1e-5.
DEFAULT_TAUS = (math.pi / 64, math.pi / 32, math.pi / 16, math.pi / 8)

_PAIR_CHUNK = 4096


@dataclass(frozen=True)
class GaborField:
    """N positioned, oriented symmetric elements on a rectangular domain."""

    width: float
    height: float
    xy: np.ndarray      # (N, 2)
    theta: np.ndarray   # (N,), orientations normalized modulo pi

    def __post_init__(self):
        xy = np.asarray(self.xy, dtype=float).reshape(-1, 2)
        theta = np.mod(np.asarray(self.theta, dtype=float).reshape(-1), math.pi)
        if len(xy) != len(theta):
            raise ValueError("positions and orientations must have equal length")
        object.__setattr__(self, "xy", xy)
        object.__setattr__(self, "theta", theta)
        if self.width <= 0 or self.height <= 0:
            raise ValueError("domain dimensions must be positive")

    @property
    def n(self) -> int:
        return len(self.xy)

    def default_rect_width(self) -> float:
        """Expected inter-element spacing: domain width / sqrt(N)."""
        return self.width / math.sqrt(max(self.n, 1))


@dataclass(frozen=True)
class GaborDetection:
    """A validated candidate rectangle in a Gabor field."""

    i: int
    j: int
    width: float
    tau: float
    n_inside: int
    k_aligned: int
    log_nfa: float
    members: tuple[int, ...]
    ax: float = 0.0
    ay: float = 0.0
    bx: float = 0.0
    by: float = 0.0
    mode: str = "gabor"

    def sort_key(self):
        return (self.log_nfa, len(self.members), self.i, self.j, self.tau)


@dataclass(frozen=True)
class GaborReport:
    """Best NFA over all candidates plus the meaningful detections."""

    best_log_nfa: float
    best: GaborDetection | None
    detections: list[GaborDetection] = field(default_factory=list)


def angle_distance(theta: float, axis: float) -> float:
    """Circular distance modulo pi (symmetric elements)."""
    d = math.fmod(theta - axis, math.pi)
    if d < 0:
        d += math.pi
    return min(d, math.pi - d)


def tau_aligned(theta: float, axis: float, tau: float) -> bool:
    """True iff the orientation matches the axis within tau, modulo pi."""
    if not 0 < tau <= math.pi / 2:
        raise ValueError(f"tau must be in (0, pi/2], got {tau}")
    return angle_distance(theta, axis) < tau


def detect_gabor(field: GaborField, rect_width: float | None = None,
                 taus: Sequence[float] = DEFAULT_TAUS,
                 epsilon: float = 1.0) -> GaborReport:
    """Sweep all element pairs with a fixed-width rectangle.

    NFA = N(N-1)/2 * #T * min_tau B(n(r,g), k_tau(r,g), 2 tau / pi).
    The report carries the overall best (smallest) NFA even when no
    candidate is meaningful.
    """
    n = field.n
    if n < 2:
        raise ValueError("at least 2 elements are required")
    if rect_width is None:
        rect_width = field.default_rect_width()
    taus = list(taus)
    for tau in taus:
        if not 0 < tau <= math.pi / 2:
            raise ValueError(f"tau must be in (0, pi/2], got {tau}")
    log_tests = math.log10(n * (n - 1) / 2.0 * len(taus))
    log_eps = math.log10(epsilon)
    p_tau = np.array([2.0 * tau / math.pi for tau in taus])

    pts = field.xy
    ii, jj = np.triu_indices(n, k=1)
    d = pts[jj] - pts[ii]
    lengths = np.hypot(d[:, 0], d[:, 1])
    keep = lengths > GEOM_TOL
    ii, jj, lengths, d = ii[keep], jj[keep], lengths[keep], d[keep]
    dirs = d / lengths[:, None]
    axes = np.arctan2(dirs[:, 1], dirs[:, 0])

    best_log_nfa = math.inf
    best_loc = None  # (i, j, tau index, n, k)
    detections: list[GaborDetection] = []
    half = rect_width / 2.0

    for lo in range(0, len(ii), _PAIR_CHUNK):
        hi = min(lo + _PAIR_CHUNK, len(ii))
        a = pts[ii[lo:hi]]
        u = dirs[lo:hi]
        v = np.stack([-u[:, 1], u[:, 0]], axis=1)
        rel = pts[None, :, :] - a[:, None, :]
        t = np.einsum("pnk,pk->pn", rel, u)
        s = np.einsum("pnk,pk->pn", rel, v)
        inside = ((t >= -GEOM_TOL) & (t <= lengths[lo:hi, None] + GEOM_TOL)
                  & (np.abs(s) <= half + GEOM_TOL))
        n_in = inside.sum(axis=1)
        dev = np.abs(np.mod(field.theta[None, :] - axes[lo:hi, None], math.pi))
        dev = np.minimum(dev, math.pi - dev)
        # (pairs, taus) aligned counts and tails
        k_tau = np.stack([(inside & (dev < tau)).sum(axis=1) for tau in taus], axis=1)
        tails = log10_binom_tail_arr(n_in[:, None], k_tau, p_tau[None, :])
        log_nfa = log_tests + tails
        flat_best = int(np.argmin(log_nfa))
        row, col = divmod(flat_best, len(taus))
        if log_nfa[row, col] < best_log_nfa:
            best_log_nfa = float(log_nfa[row, col])
            best_loc = (lo + row, col, inside[row])
        nfa_min = log_nfa.min(axis=1)
        for r in np.nonzero(nfa_min < log_eps)[0]:
            col = int(np.argmin(log_nfa[r]))
            tau = taus[col]
            i, j = int(ii[lo + r]), int(jj[lo + r])
            members = tuple(int(m) for m in np.nonzero(inside[r] & (dev[r] < tau))[0])
            ax, ay = pts[i]
            bx, by = pts[j]
            detections.append(GaborDetection(
                i=i, j=j, width=rect_width, tau=tau,
                n_inside=int(n_in[r]), k_aligned=int(k_tau[r, col]),
                log_nfa=float(nfa_min[r]), members=members,
                ax=ax, ay=ay, bx=bx, by=by))

    best = None
    if best_loc is not None:
        row, col, inside_row = best_loc
        tau = taus[col]
        i, j = int(ii[row]), int(jj[row])
        axis = float(axes[row])
        members = tuple(
            int(m) for m in np.nonzero(inside_row)[0]
            if angle_distance(float(field.theta[m]), axis) < tau
        )
        ax, ay = pts[i]
        bx, by = pts[j]
        best = GaborDetection(
            i=i, j=j, width=rect_width, tau=tau,
            n_inside=int(inside_row.sum()), k_aligned=len(members),
            log_nfa=best_log_nfa, members=members,
            ax=ax, ay=ay, bx=bx, by=by)
    detections.sort(key=GaborDetection.sort_key)
    return GaborReport(best_log_nfa=best_log_nfa, best=best, detections=detections)


def make_rescorer(field: GaborField, det: GaborDetection) -> Callable[[frozenset], float]:
    """Rescoring closure for the masking filters.

    Removed members leave the rectangle entirely: both the inside count
    and the per-tau aligned counts drop accordingly.  The precision is
    re-minimized over the original tau family.
    """
    n = field.n
    taus = list(DEFAULT_TAUS) if det.tau in DEFAULT_TAUS else [det.tau]
    log_tests = math.log10(n * (n - 1) / 2.0 * len(taus))
    axis = math.atan2(det.by - det.ay, det.bx - det.ax)
    devs = {m: angle_distance(float(field.theta[m]), axis) for m in det.members}
    base_inside = det.n_inside

    def rescore(members: frozenset) -> float:
        removed = len(det.members) - len(members & frozenset(det.members))
        n_inside = base_inside - removed
        best = 0.0
        for tau in taus:
            k = sum(1 for m in members if devs.get(m, math.inf) < tau)
            if k > n_inside:
                k = n_inside
            best = min(best, log10_binom_tail(n_inside, k, 2.0 * tau / math.pi))
        return log_tests + best

    return rescore
