"""Per-tile scoring behind a single contract: a scorer maps an r x r
tile image to a pair of raw (foreground, background) score maps.

Three variants are provided. `HsvScorerConfig` is the color-threshold
baseline (hard 0/1 scores from an HSV box plus connected-component size
filtering). `PrecomputedScorerConfig` reads score maps produced by an
external model from sidecar files, keyed by image stem and tile index.
`OracleScorerConfig` wraps a caller-supplied deterministic function of
the tile pixels, which makes round-trip tests expressible.

Softmax normalization of fused maps also lives here.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage

from .core import RasterImage, ScoreMap, SegMask
from .errors import (
    CorruptData,
    EmptyDataset,
    MissingScoreFile,
    ShapeMismatch,
)
from .tiler import Tile

# 4-connectivity structuring element, shared with the region-growing step.
FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def rgb_to_hsv_array(rgb: np.ndarray) -> np.ndarray:
    """Hexcone RGB -> HSV for an (..., 3) uint8 array.

    Returns float64 (..., 3) with H in degrees [0, 360), S and V in
    [0, 1]. Achromatic pixels get H = 0. Channel precedence on ties
    (R, then G, then B) matches the standard reference conversion.
    """
    arr = rgb.astype(np.float64) / 255.0
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    v = arr.max(axis=-1)
    c = v - arr.min(axis=-1)
    s = np.divide(c, v, out=np.zeros_like(v), where=v > 0)

    h = np.zeros_like(v)
    chroma = c > 0
    safe_c = np.where(chroma, c, 1.0)
    r_max = chroma & (r == v)
    g_max = chroma & ~r_max & (g == v)
    b_max = chroma & ~r_max & ~g_max
    h = np.where(r_max, ((g - b) / safe_c) % 6.0, h)
    h = np.where(g_max, (b - r) / safe_c + 2.0, h)
    h = np.where(b_max, (r - g) / safe_c + 4.0, h)
    h = (h * 60.0) % 360.0
    return np.stack([h, s, v], axis=-1)


def rgb_to_hsv(pixel: tuple[int, int, int]) -> tuple[float, float, float]:
    """Convert one 8-bit RGB triple; see `rgb_to_hsv_array`."""
    h, s, v = rgb_to_hsv_array(np.array(pixel, dtype=np.uint8).reshape(1, 1, 3))[0, 0]
    return float(h), float(s), float(v)


@dataclass(frozen=True)
class HsvThresholds:
    """Inclusive HSV box; the hue interval may wrap around 360 -> 0
    (hue_lo > hue_hi selects [hue_lo, 360) plus [0, hue_hi])."""

    hue_lo: float = 0.0
    hue_hi: float = 360.0
    sat_lo: float = 0.0
    sat_hi: float = 1.0
    val_lo: float = 0.0
    val_hi: float = 1.0
    min_region_area: int = 0

    def __post_init__(self):
        if self.sat_lo > self.sat_hi:
            raise ValueError("sat_lo must be <= sat_hi")
        if self.val_lo > self.val_hi:
            raise ValueError("val_lo must be <= val_hi")
        if self.min_region_area < 0:
            raise ValueError("min_region_area must be >= 0")


def hsv_foreground(image_data: np.ndarray, thresholds: HsvThresholds) -> np.ndarray:
    """Boolean foreground mask for an (h, w, 3) uint8 image: pixels whose
    HSV lies inside the box and that belong to a 4-connected in-box
    component of at least `min_region_area` pixels."""
    hsv = rgb_to_hsv_array(image_data)
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    if thresholds.hue_lo <= thresholds.hue_hi:
        hue_in = (h >= thresholds.hue_lo) & (h <= thresholds.hue_hi)
    else:
        hue_in = (h >= thresholds.hue_lo) | (h <= thresholds.hue_hi)
    inside = (
        hue_in
        & (s >= thresholds.sat_lo)
        & (s <= thresholds.sat_hi)
        & (v >= thresholds.val_lo)
        & (v <= thresholds.val_hi)
    )
    if thresholds.min_region_area > 1 and inside.any():
        labels, n = ndimage.label(inside, structure=FOUR_CONNECTED)
        if n:
            sizes = np.bincount(labels.ravel(), minlength=n + 1)
            keep = sizes >= thresholds.min_region_area
            keep[0] = False
            inside = keep[labels]
    return inside


@dataclass(frozen=True)
class HsvScorerConfig:
    thresholds: HsvThresholds


@dataclass(frozen=True)
class PrecomputedScorerConfig:
    """Reads `<image_stem>.tile<index>.bsgs` sidecar files from a directory."""

    directory: Path
    image_stem: str


@dataclass(frozen=True)
class OracleScorerConfig:
    """`score_fn` receives the (r, r, 3) uint8 tile pixels and returns a
    pair of (r, r) float arrays (foreground, background). It must be a
    deterministic function of the pixel colors."""

    score_fn: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


ScorerConfig = HsvScorerConfig | PrecomputedScorerConfig | OracleScorerConfig


def score_tile(
    config: ScorerConfig, tile_image: RasterImage, tile: Tile
) -> tuple[ScoreMap, ScoreMap]:
    """Apply the configured scorer to one tile. Returns raw
    (unnormalized) foreground and background maps of the tile's size."""
    if isinstance(config, HsvScorerConfig):
        fg = hsv_foreground(tile_image.data, config.thresholds).astype(np.float64)
        return ScoreMap(fg), ScoreMap(1.0 - fg)
    if isinstance(config, PrecomputedScorerConfig):
        path = Path(config.directory) / f"{config.image_stem}.tile{tile.index}.bsgs"
        if not path.is_file():
            raise MissingScoreFile(f"no precomputed score map at {path}")
        m_fg, m_bg = read_scoremap_pair(path)
        if (m_fg.height, m_fg.width) != (tile_image.height, tile_image.width):
            raise ShapeMismatch(
                f"{path.name} is {m_fg.height}x{m_fg.width}, "
                f"tile is {tile_image.height}x{tile_image.width}"
            )
        return m_fg, m_bg
    if isinstance(config, OracleScorerConfig):
        fg, bg = config.score_fn(tile_image.data)
        fg = np.asarray(fg, dtype=np.float64)
        bg = np.asarray(bg, dtype=np.float64)
        if fg.shape != tile_image.data.shape[:2] or bg.shape != tile_image.data.shape[:2]:
            raise ShapeMismatch("oracle score maps must match the tile shape")
        return ScoreMap(fg), ScoreMap(bg)
    raise TypeError(f"unknown scorer config {type(config).__name__}")


def normalize(m_fg: ScoreMap, m_bg: ScoreMap) -> tuple[ScoreMap, ScoreMap]:
    """Two-class softmax applied per pixel, in the numerically stable
    form (per-pixel max subtracted before exponentiation). The outputs
    sum to one at every pixel and are invariant to adding a common
    constant to both inputs."""
    if (m_fg.height, m_fg.width) != (m_bg.height, m_bg.width):
        raise ShapeMismatch(
            f"score maps differ: {m_fg.height}x{m_fg.width} vs {m_bg.height}x{m_bg.width}"
        )
    top = np.maximum(m_fg.values, m_bg.values)
    e_fg = np.exp(m_fg.values - top)
    e_bg = np.exp(m_bg.values - top)
    total = e_fg + e_bg
    return ScoreMap(e_fg / total), ScoreMap(e_bg / total)


def grid_search_hsv(
    dataset: Sequence[tuple[RasterImage, SegMask]],
    candidates: Sequence[HsvThresholds],
):
    """Exhaustively evaluate candidate HSV boxes with the baseline scorer
    and direct 0.5 thresholding (no refinement); return the candidate
    maximizing mean F1 over the dataset together with its aggregate
    report. Ties keep the earliest candidate, so the result does not
    depend on evaluation schedule.
    """
    from .evaluation import compare, mean_report

    if not dataset:
        raise EmptyDataset("grid search needs at least one (image, mask) pair")
    if not candidates:
        raise EmptyDataset("grid search needs at least one candidate")
    best = None
    best_f1 = -1.0
    best_report = None
    for cand in candidates:
        reports = []
        for image, truth in dataset:
            pred = SegMask((hsv_foreground(image.data, cand)).astype(np.uint8))
            reports.append(compare(pred, truth))
        agg = mean_report(reports)
        if agg.f1 > best_f1:
            best, best_f1, best_report = cand, agg.f1, agg
    return best, best_report


def grid_from_axes(
    hue_los: Sequence[float] = (0.0,),
    hue_his: Sequence[float] = (360.0,),
    sat_los: Sequence[float] = (0.0,),
    sat_his: Sequence[float] = (1.0,),
    val_los: Sequence[float] = (0.0,),
    val_his: Sequence[float] = (1.0,),
    min_region_areas: Sequence[int] = (0,),
) -> list[HsvThresholds]:
    """Cross the given axis values into a deterministic candidate list
    (last axis varies fastest). Inconsistent combinations (lo > hi)
    are skipped."""
    out = []
    for hl in hue_los:
        for hh in hue_his:
            for sl in sat_los:
                for sh in sat_his:
                    if sl > sh:
                        continue
                    for vl in val_los:
                        for vh in val_his:
                            if vl > vh:
                                continue
                            for area in min_region_areas:
                                out.append(HsvThresholds(hl, hh, sl, sh, vl, vh, area))
    return out


# Sidecar score-map file format: 16-byte header (magic "BSGS", version
# u16, width u32, height u32, reserved u16, all little-endian) followed
# by two row-major float32 planes, foreground then background.
_BSGS_MAGIC = b"BSGS"
_BSGS_VERSION = 1
_BSGS_HEADER = struct.Struct("<4sHIIH")


def write_scoremap_pair(path: str | Path, m_fg: ScoreMap, m_bg: ScoreMap) -> None:
    if (m_fg.height, m_fg.width) != (m_bg.height, m_bg.width):
        raise ShapeMismatch("score map pair must share dimensions")
    header = _BSGS_HEADER.pack(_BSGS_MAGIC, _BSGS_VERSION, m_fg.width, m_fg.height, 0)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(m_fg.values.astype("<f4").tobytes())
        fh.write(m_bg.values.astype("<f4").tobytes())


def read_scoremap_pair(path: str | Path) -> tuple[ScoreMap, ScoreMap]:
    path = Path(path)
    if not path.is_file():
        raise MissingScoreFile(f"no score-map file at {path}")
    blob = path.read_bytes()
    if len(blob) < _BSGS_HEADER.size:
        raise CorruptData(f"{path} is shorter than the header")
    magic, version, width, height, _ = _BSGS_HEADER.unpack_from(blob)
    if magic != _BSGS_MAGIC:
        raise CorruptData(f"{path} has bad magic {magic!r}")
    if version != _BSGS_VERSION:
        raise CorruptData(f"{path} has unsupported version {version}")
    plane = width * height * 4
    if len(blob) != _BSGS_HEADER.size + 2 * plane:
        raise CorruptData(f"{path} has wrong payload size for {width}x{height}")
    offset = _BSGS_HEADER.size
    fg = np.frombuffer(blob, dtype="<f4", count=width * height, offset=offset)
    bg = np.frombuffer(blob, dtype="<f4", count=width * height, offset=offset + plane)
    shape = (height, width)
    return (
        ScoreMap(fg.reshape(shape).astype(np.float64)),
        ScoreMap(bg.reshape(shape).astype(np.float64)),
    )
