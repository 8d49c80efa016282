"""Split a high-resolution image into overlapping square tiles and fuse
per-tile score maps back into full-resolution maps.

Each tile has an r x r *sampling window* and a smaller *ownership
rectangle*: the sub-region whose scores survive fusion. Overlap bands are
split at their midline between neighbors, so the ownership rectangles
partition the image exactly and every pixel receives its prediction from
exactly one tile. Discarding overlap (rather than blending it) is what
keeps tile boundaries free of stitching artifacts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import RasterImage, ScoreMap
from .errors import CountMismatch, InvalidSpec, LayoutMismatch, ShapeMismatch


@dataclass(frozen=True)
class TileSpec:
    """Square tile side length and linear overlap fraction per axis."""

    tile_size: int
    overlap_fraction: float = 0.10

    def __post_init__(self):
        if self.tile_size < 2:
            raise InvalidSpec(f"tile_size must be >= 2, got {self.tile_size}")
        if not 0.0 <= self.overlap_fraction < 0.5:
            raise InvalidSpec(f"overlap_fraction must be in [0, 0.5), got {self.overlap_fraction}")
        if 2 * self.overlap_px >= self.tile_size:
            raise InvalidSpec(
                f"overlap of {self.overlap_px}px is not < half of tile_size {self.tile_size}"
            )

    @property
    def overlap_px(self) -> int:
        return round(self.overlap_fraction * self.tile_size)

    @property
    def stride(self) -> int:
        return self.tile_size - self.overlap_px


@dataclass(frozen=True)
class Rect:
    """Half-open pixel rectangle [x0, x1) x [y0, y1)."""

    x0: int
    y0: int
    x1: int
    y1: int

    @property
    def width(self) -> int:
        return self.x1 - self.x0

    @property
    def height(self) -> int:
        return self.y1 - self.y0


@dataclass(frozen=True)
class Tile:
    index: int
    window_x: int  # top-left of the r x r sampling window
    window_y: int
    ownership: Rect  # pixels this tile's scores keep after fusion


@dataclass(frozen=True)
class TileLayout:
    spec: TileSpec
    image_width: int
    image_height: int
    n_cols: int
    n_rows: int
    tiles: tuple[Tile, ...]

    def __len__(self) -> int:
        return len(self.tiles)


def _axis_starts(dim: int, r: int, stride: int) -> list[int]:
    """Window origins along one axis: multiples of the stride, with the
    last window clamped to end exactly at the (padded) image edge."""
    last = max(dim, r) - r
    starts = list(range(0, last + 1, stride))
    if starts[-1] != last:
        starts.append(last)
    return starts


def _axis_bounds(starts: list[int], r: int, dim: int) -> list[int]:
    """Ownership boundaries: each overlap band is split at its midline;
    the first and last tile also own their outer margins."""
    bounds = [0]
    for a, b in zip(starts, starts[1:]):
        bounds.append((a + r + b) // 2)
    bounds.append(dim)
    return bounds


def plan_tiles(width: int, height: int, spec: TileSpec) -> TileLayout:
    """Lay out the sliding-window grid for an image of the given size.

    Tiles are ordered row-major by window origin. The ownership
    rectangles of the returned tiles are a disjoint exact cover of
    [0, width) x [0, height).
    """
    if width < 1 or height < 1:
        raise InvalidSpec(f"image dimensions must be >= 1, got {width}x{height}")
    r = spec.tile_size
    xs = _axis_starts(width, r, spec.stride)
    ys = _axis_starts(height, r, spec.stride)
    xb = _axis_bounds(xs, r, width)
    yb = _axis_bounds(ys, r, height)

    tiles = []
    for row, wy in enumerate(ys):
        for col, wx in enumerate(xs):
            own = Rect(xb[col], yb[row], xb[col + 1], yb[row + 1])
            tiles.append(Tile(index=len(tiles), window_x=wx, window_y=wy, ownership=own))
    return TileLayout(
        spec=spec,
        image_width=width,
        image_height=height,
        n_cols=len(xs),
        n_rows=len(ys),
        tiles=tuple(tiles),
    )


def _check_tile(tile: Tile, layout: TileLayout) -> None:
    if not 0 <= tile.index < len(layout.tiles) or layout.tiles[tile.index] != tile:
        raise LayoutMismatch(f"tile {tile.index} does not belong to this layout")


def extract_tile(image: RasterImage, tile: Tile, layout: TileLayout) -> RasterImage:
    """Cut the tile's r x r sampling window out of the image.

    Windows only reach past the image edge when the image is smaller than
    the tile size; the missing band is filled by mirroring interior
    rows/columns (edge-inclusive reflection).
    """
    if (image.width, image.height) != (layout.image_width, layout.image_height):
        raise LayoutMismatch(
            f"layout is for {layout.image_width}x{layout.image_height}, "
            f"image is {image.width}x{image.height}"
        )
    _check_tile(tile, layout)
    r = layout.spec.tile_size
    x0, y0 = tile.window_x, tile.window_y
    crop = image.data[y0 : min(y0 + r, image.height), x0 : min(x0 + r, image.width)]
    pad_y = r - crop.shape[0]
    pad_x = r - crop.shape[1]
    if pad_y or pad_x:
        crop = np.pad(crop, ((0, pad_y), (0, pad_x), (0, 0)), mode="symmetric")
    return RasterImage(crop)


ScorePair = tuple[ScoreMap, ScoreMap]


def fuse(
    layout: TileLayout, tile_scores: Sequence[ScorePair] | Mapping[int, ScorePair]
) -> tuple[ScoreMap, ScoreMap]:
    """Assemble per-tile (foreground, background) score maps into two
    full-resolution maps.

    `tile_scores` is either a sequence aligned with `layout.tiles` or a
    mapping from tile index to score pair (so results arriving out of
    order, e.g. from a worker pool, fuse without re-sorting). Within each
    tile's ownership rectangle the output equals the corresponding
    sub-window of that tile's map bit-exactly; overlap pixels outside
    the rectangle are discarded. Because ownership rectangles are
    disjoint, the output is independent of processing order.
    """
    if isinstance(tile_scores, Mapping):
        items = list(tile_scores.items())
    else:
        items = list(enumerate(tile_scores))
    if len(items) != len(layout.tiles) or {i for i, _ in items} != set(range(len(layout.tiles))):
        raise CountMismatch(
            f"expected one score pair for each of {len(layout.tiles)} tiles, got {len(items)}"
        )
    r = layout.spec.tile_size
    full_fg = np.zeros((layout.image_height, layout.image_width), dtype=np.float64)
    full_bg = np.zeros_like(full_fg)
    for index, (m_fg, m_bg) in items:
        tile = layout.tiles[index]
        for m in (m_fg, m_bg):
            if (m.height, m.width) != (r, r):
                raise ShapeMismatch(
                    f"tile {index}: score map is {m.height}x{m.width}, expected {r}x{r}"
                )
        own = tile.ownership
        ry0, ry1 = own.y0 - tile.window_y, own.y1 - tile.window_y
        rx0, rx1 = own.x0 - tile.window_x, own.x1 - tile.window_x
        full_fg[own.y0 : own.y1, own.x0 : own.x1] = m_fg.values[ry0:ry1, rx0:rx1]
        full_bg[own.y0 : own.y1, own.x0 : own.x1] = m_bg.values[ry0:ry1, rx0:rx1]
    return ScoreMap(full_fg), ScoreMap(full_bg)
