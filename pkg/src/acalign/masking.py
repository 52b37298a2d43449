"""Redundancy resolution over raw detections.

Two filters operate on any detection list whose members are building
elements (dots or Gabor elements):

* ``exclusion_filter`` -- each element may support at most one accepted
  gestalt; accepted gestalts permanently consume their members.
* ``masking_filter``   -- a gestalt is rejected only if a *single*
  already-accepted gestalt explains it away: removing that gestalt's
  members makes it non-meaningful.  Elements are never globally
  consumed, so crossing families (e.g. rows and columns of a grid) can
  coexist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from . import dots, gabor


@dataclass
class GestaltCandidate:
    """A detection together with its member set and a rescoring hook.

    ``rescore`` recomputes log10(NFA) for a reduced member set using the
    original geometry and test count; ``rescore(members)`` equals the
    original score.
    """

    detection: object
    members: frozenset
    rescore: Callable[[frozenset], float]

    def sort_key(self):
        return self.detection.sort_key()


def from_dot_detections(pattern: dots.DotPattern,
                        detections: Sequence[dots.DotDetection],
                        band_factor: float = dots.BAND_FACTOR) -> list[GestaltCandidate]:
    w_mean = dots.mean_width_count(pattern)
    return [
        GestaltCandidate(d, frozenset(d.members),
                         dots.make_rescorer(pattern, d, band_factor, w_mean))
        for d in detections
    ]


def from_gabor_detections(field, detections) -> list[GestaltCandidate]:
    return [
        GestaltCandidate(d, frozenset(d.members), gabor.make_rescorer(field, d))
        for d in detections
    ]


def exclusion_filter(candidates: Sequence[GestaltCandidate],
                     epsilon: float = 1.0) -> list[GestaltCandidate]:
    """Greedy exclusion: accepted gestalts consume their members.

    Repeatedly accepts the currently most meaningful candidate, removes
    its members from all remaining candidates, rescores them and drops
    the ones that are no longer meaningful.
    """
    log_eps = math.log10(epsilon)
    pool = [(c.sort_key(), frozenset(c.members), c) for c in candidates]
    pool = [row for row in pool if row[0][0] < log_eps]
    accepted: list[GestaltCandidate] = []
    while pool:
        pool.sort(key=lambda row: row[0])
        key, members, best = pool.pop(0)
        accepted.append(best)
        survivors = []
        for k, m, c in pool:
            reduced = m - members
            if reduced == m:
                survivors.append((k, m, c))
                continue
            score = c.rescore(reduced)
            if score < log_eps:
                survivors.append(((score,) + k[1:], reduced, c))
        pool = survivors
    return accepted


def masking_filter(candidates: Sequence[GestaltCandidate],
                   epsilon: float = 1.0) -> list[GestaltCandidate]:
    """Masking principle: pairwise, Nash-style redundancy removal.

    Candidates are visited by ascending NFA; a candidate is rejected iff
    some single already-accepted gestalt masks it, i.e. rescoring it
    without that gestalt's members makes it non-meaningful.
    """
    log_eps = math.log10(epsilon)
    ordered = sorted((c for c in candidates if c.sort_key()[0] < log_eps),
                     key=GestaltCandidate.sort_key)
    accepted: list[GestaltCandidate] = []
    for cand in ordered:
        masked = any(
            cand.rescore(cand.members - a.members) >= log_eps
            for a in accepted
            if cand.members & a.members
        )
        if not masked:
            accepted.append(cand)
    return accepted


def apply_filter(candidates: Sequence[GestaltCandidate], name: str,
                 epsilon: float = 1.0) -> list[GestaltCandidate]:
    if name == "none":
        return list(candidates)
    if name == "exclusion":
        return exclusion_filter(candidates, epsilon)
    if name == "masking":
        return masking_filter(candidates, epsilon)
    raise ValueError(f"unknown filter {name!r}")
