"""Region Growing Refinement.

Turns a normalized foreground probability map plus the source image into
a crisp binary mask. The map is split into high-confidence foreground,
high-confidence background and an uncertainty band; several Monte Carlo
runs then sample seeds from the confident pixels, grow appearance-based
clusters (best-first on distance to the cluster's running mean color),
and classify each cluster by majority vote of its pixels' scores against
the vote threshold. A pixel's final label is the majority verdict across
runs. The scribble-seeded variant replaces the confidence bands with
user strokes and votes clusters by their stroke content instead.

Everything is deterministic given `RgrParams.rng_seed`: each run draws
from its own stream derived from (seed, run index), and runs combine by
a commutative vote, so neither execution order nor worker scheduling can
change the result.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ._growth import grow_clusters
from .core import RasterImage, ScoreMap, SegMask
from .errors import (
    EmptyStrokes,
    OverlappingStrokes,
    RefinementFallbackWarning,
    ShapeMismatch,
)


@dataclass(frozen=True)
class RgrParams:
    """Refinement thresholds and Monte Carlo controls.

    `tau_f` defaults to 1.25 x tau0 when left as None. `theta` is the
    maximum color distance for growing, in normalized-RGB units (an RGB
    cube diagonal is sqrt(3)); theta = 0 degenerates to per-pixel
    thresholding at tau0.
    """

    tau0: float = 0.3
    tau_b: float = 0.1
    tau_f: float | None = None
    mc_runs: int = 5
    seed_fraction: float = 0.25
    theta: float = 0.1
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.tau0 < 1.0:
            raise ValueError(f"tau0 must be in (0, 1), got {self.tau0}")
        if not 0.0 < self.tau_b < 1.0:
            raise ValueError(f"tau_b must be in (0, 1), got {self.tau_b}")
        if self.tau_f is not None and not 0.0 < self.tau_f < 1.0:
            raise ValueError(f"tau_f must be in (0, 1), got {self.tau_f}")
        if self.mc_runs < 1:
            raise ValueError("mc_runs must be >= 1")
        if not 0.0 < self.seed_fraction <= 1.0:
            raise ValueError("seed_fraction must be in (0, 1]")
        if self.theta < 0.0:
            raise ValueError("theta must be >= 0")

    @property
    def resolved_tau_f(self) -> float:
        return 1.25 * self.tau0 if self.tau_f is None else self.tau_f

    def with_tau0(self, tau0: float) -> "RgrParams":
        """New params with a different vote threshold; tau_f follows as
        1.25 x tau0, tau_b stays fixed."""
        return RgrParams(
            tau0=tau0,
            tau_b=self.tau_b,
            tau_f=None,
            mc_runs=self.mc_runs,
            seed_fraction=self.seed_fraction,
            theta=self.theta,
            rng_seed=self.rng_seed,
        )


@dataclass(frozen=True)
class ConfidencePartition:
    """Disjoint boolean masks covering the image."""

    foreground: np.ndarray
    background: np.ndarray
    uncertain: np.ndarray


@dataclass(frozen=True)
class ClusterMap:
    """Cluster assignment of one Monte Carlo run. Pixels the growth never
    reached are materialized as singleton clusters, so every pixel has
    exactly one id in [0, n_clusters)."""

    labels: np.ndarray  # (height, width) int32
    n_clusters: int


def _check_normalized(prob_fg: ScoreMap) -> None:
    if not prob_fg.is_normalized():
        raise ValueError("expected a normalized score map with values in [0, 1]")


def partition_confidence(prob_fg: ScoreMap, params: RgrParams) -> ConfidencePartition:
    """Split pixels into high-confidence foreground (score > tau_f),
    high-confidence background (score < tau_b) and the remaining
    uncertainty region.

    Normally tau_b < tau_f and the bands cannot meet, but sweeping tau0
    low enough drives the derived tau_f below tau_b; the foreground band
    then takes precedence where the two would overlap, keeping the three
    sets a disjoint cover (the seed pool, their union, is unaffected).
    """
    _check_normalized(prob_fg)
    vals = prob_fg.values
    fg = vals > params.resolved_tau_f
    bg = (vals < params.tau_b) & ~fg
    return ConfidencePartition(foreground=fg, background=bg, uncertain=~(fg | bg))


def _normalized_colors(image: RasterImage) -> np.ndarray:
    return (image.data.reshape(-1, 3).astype(np.float32)) / np.float32(255.0)


def _run_seeds(candidates: np.ndarray, n_seeds: int, rng_seed: int, run_index: int) -> np.ndarray:
    """Sample seeds for one run from its own deterministic stream."""
    rng = np.random.default_rng([rng_seed & 0xFFFFFFFFFFFFFFFF, run_index])
    return np.sort(rng.choice(candidates, size=n_seeds, replace=False)).astype(np.int64)


def _grow(colors: np.ndarray, height: int, width: int, seeds: np.ndarray, theta: float):
    labels = np.full(height * width, -1, dtype=np.int32)
    sums, counts = grow_clusters(colors, height, width, labels, seeds, float(theta))
    return labels, sums, counts


def _seed_count(n_candidates: int, seed_fraction: float) -> int:
    return min(n_candidates, math.ceil(seed_fraction * n_candidates))


def cluster_single_run(
    image: RasterImage, confidence: np.ndarray, params: RgrParams, run_index: int
) -> ClusterMap:
    """Grow the clusters of one Monte Carlo run (mainly for inspection
    and tests). `confidence` is the boolean mask seeds are drawn from."""
    if confidence.shape != (image.height, image.width):
        raise ShapeMismatch("confidence mask must match the image")
    candidates = np.flatnonzero(confidence.ravel())
    if candidates.size == 0:
        raise ValueError("confidence mask selects no pixels")
    seeds = _run_seeds(candidates, _seed_count(candidates.size, params.seed_fraction),
                       params.rng_seed, run_index)
    labels, _, counts = _grow(_normalized_colors(image), image.height, image.width,
                              seeds, params.theta)
    k = counts.shape[0]
    unassigned = labels < 0
    full = labels.copy()
    full[unassigned] = k + np.arange(int(unassigned.sum()), dtype=np.int32)
    return ClusterMap(labels=full.reshape(image.height, image.width),
                      n_clusters=k + int(unassigned.sum()))


def _scored_run_verdict(
    colors: np.ndarray,
    height: int,
    width: int,
    candidates: np.ndarray,
    n_seeds: int,
    positive: np.ndarray,
    params: RgrParams,
    run_index: int,
) -> np.ndarray:
    """One Monte Carlo run of score-voted growth; returns the boolean
    per-pixel foreground verdict."""
    seeds = _run_seeds(candidates, n_seeds, params.rng_seed, run_index)
    labels, _, counts = _grow(colors, height, width, seeds, params.theta)
    k = counts.shape[0]
    assigned = labels >= 0
    lab = labels[assigned]
    pos_per_cluster = np.bincount(lab, weights=positive[assigned], minlength=k)
    cluster_fg = 2.0 * pos_per_cluster > counts
    return np.where(assigned, cluster_fg[np.where(assigned, labels, 0)], positive > 0)


def refine(image: RasterImage, prob_fg: ScoreMap, params: RgrParams) -> SegMask:
    """Full Monte Carlo refinement of a normalized foreground map.

    Falls back to direct thresholding at tau0 (with a
    `RefinementFallbackWarning`) when no pixel clears either confidence
    threshold, since there is nothing to seed from.
    """
    if (prob_fg.height, prob_fg.width) != (image.height, image.width):
        raise ShapeMismatch(
            f"map is {prob_fg.height}x{prob_fg.width}, image is {image.height}x{image.width}"
        )
    _check_normalized(prob_fg)
    part = partition_confidence(prob_fg, params)
    confident = part.foreground | part.background
    thresholded = prob_fg.values > params.tau0
    if not confident.any():
        warnings.warn(
            "no high-confidence pixels; falling back to direct thresholding",
            RefinementFallbackWarning,
            stacklevel=2,
        )
        return SegMask(thresholded.astype(np.uint8))

    candidates = np.flatnonzero(confident.ravel())
    n_seeds = _seed_count(candidates.size, params.seed_fraction)
    colors = _normalized_colors(image)
    positive = thresholded.ravel().astype(np.float64)
    fg_votes = np.zeros(image.height * image.width, dtype=np.int32)
    for run_index in range(params.mc_runs):
        fg_votes += _scored_run_verdict(
            colors, image.height, image.width, candidates, n_seeds, positive, params, run_index
        )
    needed = (params.mc_runs + 1) // 2
    return SegMask((fg_votes >= needed).astype(np.uint8).reshape(image.height, image.width))


def _nearest_ref_verdict(
    query: np.ndarray, ref_colors: np.ndarray, ref_verdicts: np.ndarray
) -> np.ndarray:
    """Verdict of the reference cluster with the smallest mean-color
    distance. A KD-tree keeps this cheap when most of the image is
    unreached singletons; exact-tie resolution follows the tree order,
    which is deterministic for identical inputs."""
    tree = cKDTree(ref_colors.astype(np.float64))
    _, idx = tree.query(query.astype(np.float64), k=1, workers=1)
    return ref_verdicts[idx]


def _scribble_run_verdict(
    colors: np.ndarray,
    height: int,
    width: int,
    fg_flat: np.ndarray,
    bg_flat: np.ndarray,
    params: RgrParams,
    run_index: int,
) -> np.ndarray:
    candidates = np.flatnonzero(fg_flat | bg_flat)
    n_seeds = _seed_count(candidates.size, params.seed_fraction)
    seeds = _run_seeds(candidates, n_seeds, params.rng_seed, run_index)
    labels, sums, counts = _grow(colors, height, width, seeds, params.theta)
    k = counts.shape[0]
    assigned = labels >= 0

    fg_per_cluster = np.bincount(labels[assigned & fg_flat], minlength=k)
    bg_per_cluster = np.bincount(labels[assigned & bg_flat], minlength=k)
    has_stroke = (fg_per_cluster + bg_per_cluster) > 0
    stroke_verdict = fg_per_cluster > bg_per_cluster

    # Reference set for clusters without strokes: stroke-containing grown
    # clusters first (ascending id), then unreached stroke pixels.
    single_stroke = ~assigned & (fg_flat | bg_flat)
    means = sums / counts[:, None]
    ref_colors = np.concatenate([means[has_stroke], colors[single_stroke].astype(np.float64)])
    ref_verdicts = np.concatenate([stroke_verdict[has_stroke], fg_flat[single_stroke]])

    cluster_verdict = stroke_verdict.copy()
    orphan = ~has_stroke & (counts > 0)
    if orphan.any():
        cluster_verdict[orphan] = _nearest_ref_verdict(means[orphan], ref_colors, ref_verdicts)

    verdict = np.empty(colors.shape[0], dtype=bool)
    verdict[assigned] = cluster_verdict[labels[assigned]]
    verdict[single_stroke] = fg_flat[single_stroke]
    single_plain = ~assigned & ~single_stroke
    if single_plain.any():
        verdict[single_plain] = _nearest_ref_verdict(
            colors[single_plain], ref_colors, ref_verdicts
        )
    return verdict


def refine_from_scribbles(
    image: RasterImage,
    fg_strokes: np.ndarray,
    bg_strokes: np.ndarray,
    params: RgrParams,
) -> SegMask:
    """Scribble-seeded refinement: user strokes are the high-confidence
    sets, and a cluster is foreground when it contains strictly more
    foreground-stroke pixels than background-stroke pixels. Clusters
    without any stroke pixels inherit the verdict of the closest
    stroke-containing cluster in mean color.
    """
    shape = (image.height, image.width)
    if fg_strokes.shape != shape or bg_strokes.shape != shape:
        raise ShapeMismatch("stroke masks must match the image dimensions")
    fg_flat = fg_strokes.ravel().astype(bool)
    bg_flat = bg_strokes.ravel().astype(bool)
    if (fg_flat & bg_flat).any():
        raise OverlappingStrokes("foreground and background strokes share pixels")
    if not fg_flat.any() or not bg_flat.any():
        raise EmptyStrokes("need at least one stroke pixel of each class")

    colors = _normalized_colors(image)
    fg_votes = np.zeros(image.height * image.width, dtype=np.int32)
    for run_index in range(params.mc_runs):
        fg_votes += _scribble_run_verdict(
            colors, image.height, image.width, fg_flat, bg_flat, params, run_index
        )
    needed = (params.mc_runs + 1) // 2
    return SegMask((fg_votes >= needed).astype(np.uint8).reshape(shape))
