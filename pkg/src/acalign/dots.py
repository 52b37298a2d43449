"""Dot alignment detectors.

Two modes are provided:

* ``basic``  -- global-density model: a candidate rectangle is scored by
  the binomial tail of its dot count against the uniform-density
  hypothesis over the whole domain.
* ``refined`` -- local model: the background density is estimated as the
  maximum of the two bands flanking the rectangle, and the rectangle is
  scored by its occupied-box count, which makes the detector insensitive
  to dot clusters and favors regular spacing.

Candidates are all oriented rectangles defined by a pair of dots plus a
width drawn from a geometric family.  The sweep is vectorized per width
level: every width in the family is a power of the ratio, so candidates
sharing the same level share the same width value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import shapely

from .stats import log10_binom_tail, log10_binom_tail_arr

GEOM_TOL = 1e-9

# Width family: widths 1, g, g^2, ... capped at length / LENGTH_CAP.
WIDTH_RATIO = 2.0
LENGTH_CAP = 4.0

# Flanking bands are BAND_FACTOR times as wide as the candidate on each
# side.  2.0 (rather than the minimal 1.0) keeps grid alignments robust
# enough that no single crossing alignment can mask another one.
BAND_FACTOR = 2.0

_PAIR_CHUNK = 4096


@dataclass(frozen=True)
class DotPattern:
    """A bounded rectangular domain plus N point positions."""

    width: float
    height: float
    points: np.ndarray  # (N, 2) float array

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "points", pts)
        if self.width <= 0 or self.height <= 0:
            raise ValueError("domain dimensions must be positive")
        if pts.size and (
            pts[:, 0].min() < -GEOM_TOL
            or pts[:, 1].min() < -GEOM_TOL
            or pts[:, 0].max() > self.width + GEOM_TOL
            or pts[:, 1].max() > self.height + GEOM_TOL
        ):
            raise ValueError("all points must lie inside the domain")

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True)
class RectCandidate:
    """Oriented rectangle spanning dots i -> j with a given width."""

    i: int
    j: int
    width: float

    def geometry(self, pattern: DotPattern):
        a = pattern.points[self.i]
        b = pattern.points[self.j]
        d = b - a
        length = float(np.hypot(*d))
        if length <= GEOM_TOL:
            raise ValueError("degenerate candidate: coincident dots")
        u = d / length
        v = np.array([-u[1], u[0]])
        return a, b, length, u, v


@dataclass(frozen=True)
class DotDetection:
    """A validated candidate with its log10(NFA) and member dots."""

    i: int
    j: int
    width: float
    log_nfa: float
    members: tuple[int, ...]
    mode: str
    ax: float = 0.0
    ay: float = 0.0
    bx: float = 0.0
    by: float = 0.0

    def sort_key(self):
        return (self.log_nfa, len(self.members), self.i, self.j, self.width)


def widths_for_length(length: float, ratio: float = WIDTH_RATIO,
                      cap: float = LENGTH_CAP) -> list[float]:
    """Geometric width series 1, ratio, ratio^2, ... up to length/cap."""
    out = []
    w = 1.0
    while w <= length / cap + GEOM_TOL:
        out.append(w)
        w *= ratio
    return out


def _width_counts(lengths: np.ndarray, ratio: float, cap: float) -> np.ndarray:
    """Number of tested widths for each candidate length."""
    counts = np.zeros(lengths.shape, dtype=int)
    limit = lengths / cap + GEOM_TOL
    ok = limit >= 1.0
    counts[ok] = np.floor(np.log(limit[ok]) / math.log(ratio) + 1e-12).astype(int) + 1
    return counts


class _PairSweep:
    """Non-degenerate dot pairs with lengths, directions and width counts."""

    def __init__(self, pattern: DotPattern, ratio: float, cap: float):
        self.pattern = pattern
        pts = pattern.points
        ii, jj = np.triu_indices(len(pts), k=1)
        d = pts[jj] - pts[ii]
        lengths = np.hypot(d[:, 0], d[:, 1])
        keep = lengths > GEOM_TOL
        self.ii, self.jj, self.lengths = ii[keep], jj[keep], lengths[keep]
        self.dirs = d[keep] / self.lengths[:, None]
        self.nwidths = _width_counts(self.lengths, ratio, cap)

    @property
    def total_widths(self) -> int:
        return int(self.nwidths.sum())

    @property
    def w_mean(self) -> float:
        return self.total_widths / len(self.ii) if len(self.ii) else 0.0

    def chunks(self):
        for lo in range(0, len(self.ii), _PAIR_CHUNK):
            yield lo, min(lo + _PAIR_CHUNK, len(self.ii))

    def project(self, lo, hi):
        """(t, s) coordinates of every dot in each pair frame of a chunk."""
        pts = self.pattern.points
        a = pts[self.ii[lo:hi]]
        u = self.dirs[lo:hi]
        v = np.stack([-u[:, 1], u[:, 0]], axis=1)
        rel = pts[None, :, :] - a[:, None, :]
        t = np.einsum("pnk,pk->pn", rel, u)
        s = np.einsum("pnk,pk->pn", rel, v)
        return t, s


def width_family(pattern: DotPattern, ratio: float = WIDTH_RATIO,
                 cap: float = LENGTH_CAP):
    """Width lists for every non-degenerate dot pair plus the mean count W.

    W enters the test count as N_tests = N(N-1) W / 2.
    """
    sweep = _PairSweep(pattern, ratio, cap)
    per_pair = {
        (int(i), int(j)): widths_for_length(length, ratio, cap)
        for i, j, length in zip(sweep.ii, sweep.jj, sweep.lengths)
    }
    return per_pair, sweep.w_mean


def mean_width_count(pattern: DotPattern, ratio: float = WIDTH_RATIO,
                     cap: float = LENGTH_CAP) -> float:
    return _PairSweep(pattern, ratio, cap).w_mean


def count_in_rect(pattern: DotPattern, candidate: RectCandidate) -> int:
    """Number of pattern dots inside the rectangle, boundary-inclusive."""
    return len(members_in_rect(pattern, candidate))


def members_in_rect(pattern: DotPattern, candidate: RectCandidate) -> list[int]:
    a, _, length, u, v = candidate.geometry(pattern)
    rel = pattern.points - a
    t = rel @ u
    s = rel @ v
    half = candidate.width / 2.0
    inside = (
        (t >= -GEOM_TOL)
        & (t <= length + GEOM_TOL)
        & (np.abs(s) <= half + GEOM_TOL)
    )
    return [int(ix) for ix in np.nonzero(inside)[0]]


def local_count(pattern: DotPattern, candidate: RectCandidate,
                band_factor: float = BAND_FACTOR) -> float:
    """Local dot count n(r, x) = 2 max(M1, M3) + M2.

    M1 and M3 are the counts in the two flanking bands (band width =
    band_factor * candidate width), area-renormalized when a band is
    clipped by the domain border.
    """
    a, _, length, u, v = candidate.geometry(pattern)
    rel = pattern.points - a
    t = rel @ u
    s = rel @ v
    half = candidate.width / 2.0
    bw = band_factor * candidate.width
    in_len = (t >= -GEOM_TOL) & (t <= length + GEOM_TOL)
    m2 = int(np.count_nonzero(in_len & (np.abs(s) <= half + GEOM_TOL)))
    m1 = int(np.count_nonzero(in_len & (s > half + GEOM_TOL) & (s <= half + bw + GEOM_TOL)))
    m3 = int(np.count_nonzero(in_len & (s < -half - GEOM_TOL) & (s >= -half - bw - GEOM_TOL)))
    f1 = _band_clip_factor(pattern, a, length, u, v, half, bw, +1)
    f3 = _band_clip_factor(pattern, a, length, u, v, half, bw, -1)
    return 2.0 * max(m1 * f1, m3 * f3) + m2


def _band_clip_factor(pattern, a, length, u, v, half, bw, side) -> float:
    """Full band area over band area inside the domain (0 if fully outside)."""
    lo = side * half
    hi = side * (half + bw)
    corners = np.array([
        a + lo * v,
        a + length * u + lo * v,
        a + length * u + hi * v,
        a + hi * v,
    ])
    xs, ys = corners[:, 0], corners[:, 1]
    if (xs.min() >= 0 and ys.min() >= 0
            and xs.max() <= pattern.width and ys.max() <= pattern.height):
        return 1.0
    poly = shapely.polygons(corners)
    domain = shapely.box(0.0, 0.0, pattern.width, pattern.height)
    clipped = shapely.area(shapely.intersection(poly, domain))
    full = length * bw
    if clipped <= full * 1e-12:
        return 0.0
    return full / clipped


def detect_basic(pattern: DotPattern, epsilon: float = 1.0,
                 ratio: float = WIDTH_RATIO, cap: float = LENGTH_CAP) -> list[DotDetection]:
    """Global-density detector: NFA = N(N-1)W/2 * B(N-2, k-2, S_r / S_D).

    The two dots defining a candidate are part of its member count k but
    are conditioned out of the tail: they sit in the rectangle by
    construction, so counting them as successes would hand every close
    pair a head start and break the false-alarm bound under noise.
    """
    n = pattern.n
    if n < 2:
        raise ValueError("at least 2 points are required")
    sweep = _PairSweep(pattern, ratio, cap)
    if len(sweep.ii) == 0 or sweep.total_widths == 0:
        return []
    log_tests = math.log10(n * (n - 1) / 2.0 * sweep.w_mean)
    log_eps = math.log10(epsilon)

    detections: list[DotDetection] = []
    for lo, hi in sweep.chunks():
        t, s = sweep.project(lo, hi)
        lengths = sweep.lengths[lo:hi]
        nwidths = sweep.nwidths[lo:hi]
        in_len = (t >= -GEOM_TOL) & (t <= lengths[:, None] + GEOM_TOL)
        abs_s = np.abs(s)
        for level in range(int(nwidths.max(initial=0))):
            rows = np.nonzero(nwidths > level)[0]
            w = ratio**level
            inside = in_len[rows] & (abs_s[rows] <= w / 2.0 + GEOM_TOL)
            k = inside.sum(axis=1)
            p = np.minimum(lengths[rows] * w / pattern.area, 1.0)
            log_nfa = log_tests + log10_binom_tail_arr(n - 2, np.maximum(k - 2, 0), p)
            for r in np.nonzero(log_nfa < log_eps)[0]:
                row = rows[r]
                i, j = int(sweep.ii[lo + row]), int(sweep.jj[lo + row])
                ax, ay = pattern.points[i]
                bx, by = pattern.points[j]
                detections.append(DotDetection(
                    i=i, j=j, width=w, log_nfa=float(log_nfa[r]),
                    members=tuple(int(m) for m in np.nonzero(inside[r])[0]),
                    mode="basic", ax=ax, ay=ay, bx=bx, by=by))
    detections.sort(key=DotDetection.sort_key)
    return detections


def box_set(n: int) -> list[int]:
    """Tested box counts {2, ..., ceil(sqrt(N)) + 1} (|C| = ceil(sqrt(N)))."""
    size = math.isqrt(max(n - 1, 0)) + 1
    return list(range(2, 2 + size))


def occupied_boxes(ts: np.ndarray, length: float, c: int) -> int:
    """Occupied boxes when the rectangle is split lengthwise into c cells."""
    if len(ts) == 0:
        return 0
    idx = np.clip(np.floor(np.asarray(ts) / length * c).astype(int), 0, c - 1)
    return len(np.unique(idx))


def _box_occupancy_prob(n_local: float, c: int, band_factor: float) -> float:
    """p1 = B(n, 1, p0): probability a box holds at least one of n dots."""
    p0 = 1.0 / ((1.0 + 2.0 * band_factor) * c)
    if n_local <= 0:
        return 0.0
    return -math.expm1(n_local * math.log1p(-p0))


def _refined_tail(ts, length, n_local, boxes, band_factor) -> float:
    """min over c of log10 B(c, b(r,c,x), p1) for one candidate."""
    boxes = np.asarray(boxes)
    p0 = 1.0 / ((1.0 + 2.0 * band_factor) * boxes)
    if n_local <= 0:
        p1 = np.zeros_like(p0)
    else:
        p1 = -np.expm1(n_local * np.log1p(-p0))
    ts = np.sort(np.asarray(ts, dtype=float))
    if len(ts) == 0:
        b = np.zeros_like(boxes)
    else:
        # Box indices along sorted ts are monotone, so the occupied-box
        # count per c is one plus the number of index jumps.
        idx = np.clip((ts[:, None] / length * boxes[None, :]).astype(int),
                      0, boxes[None, :] - 1)
        b = 1 + (np.diff(idx, axis=0) > 0).sum(axis=0)
    return float(log10_binom_tail_arr(boxes, b, p1).min(initial=0.0))


def detect_refined(pattern: DotPattern, epsilon: float = 1.0,
                   ratio: float = WIDTH_RATIO, cap: float = LENGTH_CAP,
                   band_factor: float = BAND_FACTOR) -> list[DotDetection]:
    """Local-density, occupied-box detector.

    NFA = N(N-1) W sqrt(N)/2 * min_c B(c, b(r,c,x), p1), with p1 the
    probability of one box being occupied under the local window model.
    """
    n = pattern.n
    if n < 2:
        raise ValueError("at least 2 points are required")
    sweep = _PairSweep(pattern, ratio, cap)
    if len(sweep.ii) == 0 or sweep.total_widths == 0:
        return []
    log_tests = math.log10(n * (n - 1) / 2.0 * sweep.w_mean * math.sqrt(n))
    log_eps = math.log10(epsilon)
    boxes = np.array(box_set(n))
    # Box occupancy probabilities depend on the candidate only through
    # the local count, so the pruning bound vectorizes over candidates.
    p0 = 1.0 / ((1.0 + 2.0 * band_factor) * boxes)

    detections: list[DotDetection] = []
    for lo, hi in sweep.chunks():
        t, s = sweep.project(lo, hi)
        lengths = sweep.lengths[lo:hi]
        nwidths = sweep.nwidths[lo:hi]
        in_len = (t >= -GEOM_TOL) & (t <= lengths[:, None] + GEOM_TOL)
        abs_s = np.abs(s)
        for level in range(int(nwidths.max(initial=0))):
            rows = np.nonzero(nwidths > level)[0]
            w = ratio**level
            half = w / 2.0
            bw = band_factor * w
            il = in_len[rows]
            sr = s[rows]
            inside = il & (abs_s[rows] <= half + GEOM_TOL)
            m2 = inside.sum(axis=1)
            m1 = (il & (sr > half + GEOM_TOL) & (sr <= half + bw + GEOM_TOL)).sum(axis=1)
            m3 = (il & (sr < -half - GEOM_TOL) & (sr >= -half - bw - GEOM_TOL)).sum(axis=1)
            # Prune with a lower bound on the tail: unclipped flank counts
            # under-estimate n (hence p1), and b <= min(c, M2).
            n_low = 2.0 * np.maximum(m1, m3) + m2
            p1 = -np.expm1(n_low[:, None] * np.log1p(-p0[None, :]))
            bmax = np.minimum(boxes[None, :], m2[:, None])
            bound = log10_binom_tail_arr(boxes[None, :], bmax, p1).min(axis=1)
            for r in np.nonzero(log_tests + bound < log_eps)[0]:
                row = rows[r]
                i, j = int(sweep.ii[lo + row]), int(sweep.jj[lo + row])
                cand = RectCandidate(i, j, w)
                length = float(lengths[row])
                n_local = local_count(pattern, cand, band_factor)
                ts = t[row][inside[r]]
                tail = _refined_tail(ts, length, n_local, boxes, band_factor)
                log_nfa = log_tests + tail
                if log_nfa < log_eps:
                    ax, ay = pattern.points[i]
                    bx, by = pattern.points[j]
                    detections.append(DotDetection(
                        i=i, j=j, width=w, log_nfa=log_nfa,
                        members=tuple(int(m) for m in np.nonzero(inside[r])[0]),
                        mode="refined", ax=ax, ay=ay, bx=bx, by=by))
    detections.sort(key=DotDetection.sort_key)
    return detections


def detect(pattern: DotPattern, mode: str = "refined", epsilon: float = 1.0,
           band_factor: float = BAND_FACTOR) -> list[DotDetection]:
    if mode == "basic":
        return detect_basic(pattern, epsilon)
    if mode == "refined":
        return detect_refined(pattern, epsilon, band_factor=band_factor)
    raise ValueError(f"unknown mode {mode!r}")


def make_rescorer(pattern: DotPattern, det: DotDetection,
                  band_factor: float = BAND_FACTOR,
                  w_mean: float | None = None) -> Callable[[frozenset], float]:
    """Rescoring closure for the masking filters.

    Recomputes the detection's log10(NFA) for a reduced member set,
    keeping the original rectangle geometry and the original number of
    tests (the test family was fixed a priori).
    """
    n = pattern.n
    pairs = n * (n - 1) / 2.0
    if w_mean is None:
        w_mean = mean_width_count(pattern)
    cand = RectCandidate(det.i, det.j, det.width)
    a, _, length, u, v = cand.geometry(pattern)
    rel = pattern.points - a
    tcoords = rel @ u

    if det.mode == "basic":
        log_tests = math.log10(pairs * w_mean)
        p = min(length * det.width / pattern.area, 1.0)

        def rescore(members: frozenset) -> float:
            return log_tests + log10_binom_tail(n - 2, max(len(members) - 2, 0), p)

        return rescore

    log_tests = math.log10(pairs * w_mean * math.sqrt(n))
    boxes = box_set(n)
    s = rel @ v
    half = det.width / 2.0
    bw = band_factor * det.width
    in_len = (tcoords >= -GEOM_TOL) & (tcoords <= length + GEOM_TOL)
    m1 = int(np.count_nonzero(in_len & (s > half + GEOM_TOL) & (s <= half + bw + GEOM_TOL)))
    m3 = int(np.count_nonzero(in_len & (s < -half - GEOM_TOL) & (s >= -half - bw - GEOM_TOL)))
    f1 = _band_clip_factor(pattern, a, length, u, v, half, bw, +1)
    f3 = _band_clip_factor(pattern, a, length, u, v, half, bw, -1)
    flank = 2.0 * max(m1 * f1, m3 * f3)

    def rescore(members: frozenset) -> float:
        idx = np.array(sorted(members), dtype=int)
        ts = tcoords[idx] if idx.size else np.empty(0)
        n_local = flank + len(members)
        tail = _refined_tail(ts, length, n_local, boxes, band_factor)
        return log_tests + tail

    return rescore
