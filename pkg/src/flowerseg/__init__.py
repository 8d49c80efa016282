"""High-resolution flower segmentation.

The pipeline splits an image into overlapping tiles, scores each tile
with a pluggable scorer, fuses the per-tile score maps back into
full-resolution maps (discarding overlap so every pixel is predicted
exactly once), softmax-normalizes them, and refines the result with
Monte Carlo region growing.
"""

from .core import PixelIndex, RasterImage, ScoreMap, SegMask, load_image, load_mask, save_mask
from .evaluation import EvalReport, HsvStats, MeanReport, compare, dataset_stats, sweep_tau0
from .pipeline import SegmentationResult, compute_probability_map, segment
from .rgr import (
    ClusterMap,
    ConfidencePartition,
    RgrParams,
    partition_confidence,
    refine,
    refine_from_scribbles,
)
from .scorer import (
    HsvScorerConfig,
    HsvThresholds,
    OracleScorerConfig,
    PrecomputedScorerConfig,
    ScorerConfig,
    grid_search_hsv,
    normalize,
    read_scoremap_pair,
    rgb_to_hsv,
    write_scoremap_pair,
)
from .tiler import Rect, Tile, TileLayout, TileSpec, extract_tile, fuse, plan_tiles

__version__ = "0.1.0"

__all__ = [
    "PixelIndex",
    "RasterImage",
    "ScoreMap",
    "SegMask",
    "load_image",
    "load_mask",
    "save_mask",
    "EvalReport",
    "MeanReport",
    "HsvStats",
    "compare",
    "dataset_stats",
    "sweep_tau0",
    "SegmentationResult",
    "segment",
    "compute_probability_map",
    "ClusterMap",
    "ConfidencePartition",
    "RgrParams",
    "partition_confidence",
    "refine",
    "refine_from_scribbles",
    "HsvScorerConfig",
    "HsvThresholds",
    "OracleScorerConfig",
    "PrecomputedScorerConfig",
    "ScorerConfig",
    "grid_search_hsv",
    "normalize",
    "read_scoremap_pair",
    "rgb_to_hsv",
    "write_scoremap_pair",
    "Rect",
    "Tile",
    "TileLayout",
    "TileSpec",
    "extract_tile",
    "fuse",
    "plan_tiles",
]
