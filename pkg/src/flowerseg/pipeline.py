"""End-to-end segmentation: tile, score each tile, fuse, normalize,
refine. Tiles can be scored by a worker pool; fusion keys results by
tile index, so the output is identical whatever order workers finish in.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import RasterImage, ScoreMap, SegMask
from .rgr import RgrParams, refine
from .scorer import ScorerConfig, normalize, score_tile
from .tiler import TileLayout, TileSpec, extract_tile, fuse, plan_tiles


@dataclass(frozen=True)
class SegmentationResult:
    mask: SegMask
    raw_fg: ScoreMap
    raw_bg: ScoreMap
    prob_fg: ScoreMap
    prob_bg: ScoreMap
    layout: TileLayout


def score_image_tiles(
    image: RasterImage,
    layout: TileLayout,
    scorer_config: ScorerConfig,
    workers: int = 1,
) -> dict[int, tuple[ScoreMap, ScoreMap]]:
    """Score every tile of the layout, in parallel when workers > 1."""

    def one(tile):
        return tile.index, score_tile(scorer_config, extract_tile(image, tile, layout), tile)

    if workers <= 1 or len(layout.tiles) == 1:
        return dict(one(tile) for tile in layout.tiles)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return dict(pool.map(one, layout.tiles))


def compute_score_maps(
    image: RasterImage,
    tile_spec: TileSpec,
    scorer_config: ScorerConfig,
    workers: int = 1,
) -> tuple[TileLayout, ScoreMap, ScoreMap, ScoreMap, ScoreMap]:
    """Tile, score, fuse and normalize; returns the layout, the raw
    fused maps and the normalized maps."""
    layout = plan_tiles(image.width, image.height, tile_spec)
    tile_scores = score_image_tiles(image, layout, scorer_config, workers=workers)
    raw_fg, raw_bg = fuse(layout, tile_scores)
    prob_fg, prob_bg = normalize(raw_fg, raw_bg)
    return layout, raw_fg, raw_bg, prob_fg, prob_bg


def compute_probability_map(
    image: RasterImage,
    tile_spec: TileSpec,
    scorer_config: ScorerConfig,
    workers: int = 1,
) -> ScoreMap:
    """Normalized foreground probability map for one image."""
    return compute_score_maps(image, tile_spec, scorer_config, workers=workers)[3]


def segment(
    image: RasterImage,
    tile_spec: TileSpec,
    scorer_config: ScorerConfig,
    params: RgrParams,
    workers: int = 1,
    threshold_only: bool = False,
) -> SegmentationResult:
    """Run the whole pipeline on one image.

    With `threshold_only` the refinement step is replaced by direct
    thresholding of the normalized map at tau0.
    """
    layout, raw_fg, raw_bg, prob_fg, prob_bg = compute_score_maps(
        image, tile_spec, scorer_config, workers=workers
    )
    if threshold_only:
        mask = SegMask((prob_fg.values > params.tau0).astype(np.uint8))
    else:
        mask = refine(image, prob_fg, params)
    return SegmentationResult(
        mask=mask, raw_fg=raw_fg, raw_bg=raw_bg, prob_fg=prob_fg, prob_bg=prob_bg, layout=layout
    )
