"""Seedable generators for Gabor stimuli and dot scenes.

All randomness flows through ``numpy.random.default_rng`` (PCG64), which
is stable across platforms, so a record is reproducible bit-for-bit from
its seed.  Generated coordinates are rounded to 12 significant digits so
that serializing a record and reading it back is lossless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Iterable

import numpy as np

from .dots import DotPattern
from .gabor import GaborField

# Jitter levels and alignment lengths of the stimulus grid.
JITTER_LEVELS = (0.0, math.pi / 5, math.pi / 4, math.pi / 3, math.pi / 2,
                 2 * math.pi / 3, 3 * math.pi / 4, 4 * math.pi / 5, math.pi)
LENGTH_LEVELS = tuple(range(3, 11))

_MAX_ATTEMPTS = 20000


def round_sig(x: float, digits: int = 12) -> float:
    return float(f"{float(x):.{digits}g}")


def _round_arr(a: np.ndarray) -> np.ndarray:
    return np.array([[round_sig(v) for v in row] for row in np.atleast_2d(a)])


@dataclass(frozen=True)
class StimulusSpec:
    """Parameters of one generated Gabor stimulus."""

    kind: str                 # "negative" | "positive"
    n: int = 200
    domain_width: float = 496.0
    domain_height: float = 496.0
    length: int = 0           # aligned element count (positive only)
    jitter: float = 0.0       # orientation interval size, radians
    min_spacing: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("negative", "positive"):
            raise ValueError(f"kind must be positive or negative, got {self.kind!r}")
        if self.kind == "positive" and not 2 <= self.length <= self.n:
            raise ValueError("positive stimuli need 2 <= length <= n")
        if not 0.0 <= self.jitter <= math.pi:
            raise ValueError("jitter must be in [0, pi]")

    def spacing(self) -> float:
        if self.min_spacing is not None:
            return self.min_spacing
        return self.domain_width / math.sqrt(self.n) / 2.0


@dataclass(frozen=True)
class Truth:
    """Planted segment of a positive stimulus."""

    x1: float
    y1: float
    x2: float
    y2: float
    members: tuple[int, ...]


@dataclass(frozen=True)
class StimulusRecord:
    spec: StimulusSpec
    field: GaborField
    truth: Truth | None = None


def _fill_positions(rng, existing: list, count: int, w: float, h: float,
                    spacing: float) -> list:
    """Uniform rejection sampling honoring a minimum pairwise distance."""
    pts = list(existing)
    misses = 0
    while count > 0:
        cand = np.array([rng.uniform(0.0, w), rng.uniform(0.0, h)])
        if all((cand[0] - p[0]) ** 2 + (cand[1] - p[1]) ** 2 >= spacing**2
               for p in pts):
            pts.append(cand)
            count -= 1
            misses = 0
        else:
            misses += 1
            if misses > _MAX_ATTEMPTS:
                raise RuntimeError(
                    f"min spacing {spacing} infeasible for the requested density")
    return pts


def gen_negative(spec: StimulusSpec) -> StimulusRecord:
    """N elements at min-spaced uniform positions, isotropic orientations."""
    if spec.kind != "negative":
        raise ValueError("spec.kind must be 'negative'")
    rng = np.random.default_rng(spec.seed)
    pts = _fill_positions(rng, [], spec.n, spec.domain_width,
                          spec.domain_height, spec.spacing())
    theta = rng.uniform(0.0, math.pi, size=spec.n)
    fld = GaborField(spec.domain_width, spec.domain_height,
                     _round_arr(np.array(pts)),
                     np.array([round_sig(t) for t in theta]))
    return StimulusRecord(spec=spec, field=fld)


def gen_positive(spec: StimulusSpec) -> StimulusRecord:
    """Plants `length` uniformly spaced elements on a random segment.

    Planted orientations are uniform on an interval of size `jitter`
    centered on the segment direction; jitter = pi degenerates to fully
    isotropic planted elements.  Background elements fill up to N as in
    gen_negative, respecting the spacing against the planted ones.
    """
    if spec.kind != "positive":
        raise ValueError("spec.kind must be 'positive'")
    rng = np.random.default_rng(spec.seed)
    w, h = spec.domain_width, spec.domain_height
    spacing = spec.spacing()
    # Planted spacing = expected inter-element spacing of the field.
    step = w / math.sqrt(spec.n)
    seg_len = (spec.length - 1) * step
    margin = spacing

    for _ in range(_MAX_ATTEMPTS):
        alpha = rng.uniform(0.0, math.pi)
        dx = abs(math.cos(alpha)) * seg_len / 2.0
        dy = abs(math.sin(alpha)) * seg_len / 2.0
        if w - 2 * (dx + margin) <= 0 or h - 2 * (dy + margin) <= 0:
            continue
        cx = rng.uniform(dx + margin, w - dx - margin)
        cy = rng.uniform(dy + margin, h - dy - margin)
        ux, uy = math.cos(alpha), math.sin(alpha)
        ts = np.linspace(-seg_len / 2.0, seg_len / 2.0, spec.length)
        planted = np.stack([cx + ts * ux, cy + ts * uy], axis=1)
        break
    else:
        raise RuntimeError("could not place the planted segment in the domain")

    pts = _fill_positions(rng, [p for p in planted], spec.n - spec.length,
                          w, h, spacing)
    half = spec.jitter / 2.0
    theta_planted = np.mod(alpha + rng.uniform(-half, half, size=spec.length),
                           math.pi)
    theta_bg = rng.uniform(0.0, math.pi, size=spec.n - spec.length)
    theta = np.concatenate([theta_planted, theta_bg])
    fld = GaborField(w, h, _round_arr(np.array(pts)),
                     np.array([round_sig(t) for t in theta]))
    truth = Truth(
        x1=round_sig(planted[0][0]), y1=round_sig(planted[0][1]),
        x2=round_sig(planted[-1][0]), y2=round_sig(planted[-1][1]),
        members=tuple(range(spec.length)))
    return StimulusRecord(spec=spec, field=fld, truth=truth)


def generate(spec: StimulusSpec) -> StimulusRecord:
    return gen_positive(spec) if spec.kind == "positive" else gen_negative(spec)


def batch_specs(seeds: Iterable[int], n: int = 200, domain: float = 496.0,
                jitters: Iterable[float] = JITTER_LEVELS,
                lengths: Iterable[int] = LENGTH_LEVELS) -> list[StimulusSpec]:
    """The full jitter x length positive grid for a list of seeds."""
    specs = []
    for jitter in jitters:
        for length in lengths:
            for seed in seeds:
                specs.append(StimulusSpec(
                    kind="positive", n=n, domain_width=domain,
                    domain_height=domain, length=length, jitter=jitter,
                    seed=int(seed)))
    return specs


# ---------------------------------------------------------------------------
# Dot scenes


def gen_dot_scene(recipe: str, seed: int = 0, **params) -> DotPattern:
    """Deterministic dot scenes for the harness and the figure suite.

    Recipes: noise, planted, clusters, grid, density_step.
    """
    generators = {
        "noise": _scene_noise,
        "planted": _scene_planted,
        "clusters": _scene_clusters,
        "grid": _scene_grid,
        "density_step": _scene_density_step,
    }
    if recipe not in generators:
        raise ValueError(f"unknown recipe {recipe!r}; choose from {sorted(generators)}")
    return generators[recipe](np.random.default_rng(seed), **params)


def _scene_noise(rng, n: int = 100, domain: float = 512.0) -> DotPattern:
    pts = rng.uniform(0.0, domain, size=(n, 2))
    return DotPattern(domain, domain, _round_arr(pts))


def _scene_planted(rng, n_aligned: int = 7, n_noise: int = 20,
                   domain: float = 512.0, seg_len: float | None = None) -> DotPattern:
    """Evenly spaced aligned dots plus uniform noise dots."""
    if seg_len is None:
        seg_len = 0.6 * domain
    alpha = rng.uniform(0.0, math.pi)
    dx = abs(math.cos(alpha)) * seg_len / 2.0
    dy = abs(math.sin(alpha)) * seg_len / 2.0
    cx = rng.uniform(dx + 1.0, domain - dx - 1.0)
    cy = rng.uniform(dy + 1.0, domain - dy - 1.0)
    ts = np.linspace(-seg_len / 2.0, seg_len / 2.0, n_aligned)
    planted = np.stack([cx + ts * math.cos(alpha), cy + ts * math.sin(alpha)],
                       axis=1)
    noise = rng.uniform(0.0, domain, size=(n_noise, 2))
    return DotPattern(domain, domain, _round_arr(np.vstack([planted, noise])))


def _scene_clusters(rng, cluster_size: int = 10, radius: float = 1.5,
                    separation: float = 200.0, n_noise: int = 20,
                    domain: float = 512.0) -> DotPattern:
    """Two tight dot clusters plus background noise; no actual alignment."""
    alpha = rng.uniform(0.0, math.pi)
    cx, cy = domain / 2.0, domain / 2.0
    centers = [
        (cx - separation / 2.0 * math.cos(alpha), cy - separation / 2.0 * math.sin(alpha)),
        (cx + separation / 2.0 * math.cos(alpha), cy + separation / 2.0 * math.sin(alpha)),
    ]
    pts = []
    for ccx, ccy in centers:
        r = radius * np.sqrt(rng.uniform(0.0, 1.0, size=cluster_size))
        phi = rng.uniform(0.0, 2 * math.pi, size=cluster_size)
        pts.append(np.stack([ccx + r * np.cos(phi), ccy + r * np.sin(phi)], axis=1))
    pts.append(rng.uniform(0.0, domain, size=(n_noise, 2)))
    return DotPattern(domain, domain, _round_arr(np.vstack(pts)))


def _scene_grid(rng, m: int = 10, spacing: float = 40.0,
                margin: float = 38.0) -> DotPattern:
    """m x m regular lattice, row-major point order."""
    side = 2 * margin + (m - 1) * spacing
    coords = margin + spacing * np.arange(m)
    xx, yy = np.meshgrid(coords, coords, indexing="xy")
    pts = np.stack([xx.ravel(), yy.ravel()], axis=1)
    return DotPattern(side, side, _round_arr(pts))


def _scene_density_step(rng, n_dense: int = 150, domain: float = 512.0,
                        block_frac: float = 0.45) -> DotPattern:
    """A dense uniform block inside an otherwise empty domain."""
    size = domain * block_frac
    x0 = (domain - size) / 2.0
    pts = rng.uniform(x0, x0 + size, size=(n_dense, 2))
    return DotPattern(domain, domain, _round_arr(pts))
