"""Shared fixtures and independent test oracles.

The oracles here deliberately re-derive behavior through different
routes than the library (per-pixel nearest-window assignment instead of
midline splitting, heapq instead of the compiled growth kernel, BFS
flood fill instead of scipy labeling) so that agreement is evidence,
not tautology.
"""

from __future__ import annotations

import heapq
import math

import numpy as np
import pytest

from flowerseg import RasterImage, ScoreMap


def nearest_window_layout_oracle(width, height, r, stride):
    """Independent tiling oracle: enumerate clamped window starts per
    axis, then give each pixel to the window whose center is nearest
    (ties to the later window). Returns per-axis window starts and, for
    every (row, col), the ownership rectangle."""

    def starts(dim):
        last = max(dim, r) - r
        out = list(range(0, last + 1, stride))
        if out[-1] != last:
            out.append(last)
        return out

    xs, ys = starts(width), starts(height)

    def assign(dim, ss):
        owner = np.empty(dim, dtype=int)
        for p in range(dim):
            # |2(p - s) + 1 - r| compares pixel center to window center
            # without fractions; later window wins ties.
            best = min(range(len(ss)), key=lambda i: (abs(2 * (p - ss[i]) + 1 - r), -i))
            owner[p] = best
        return owner

    x_owner, y_owner = assign(width, xs), assign(height, ys)
    rects = {}
    for row in range(len(ys)):
        for col in range(len(xs)):
            px = np.flatnonzero(x_owner == col)
            py = np.flatnonzero(y_owner == row)
            rects[(row, col)] = (
                (int(px[0]), int(py[0]), int(px[-1]) + 1, int(py[-1]) + 1)
                if px.size and py.size
                else None
            )
    return xs, ys, rects


def bfs_component_sizes(inside: np.ndarray) -> np.ndarray:
    """4-connected component size per pixel (0 outside), via BFS."""
    h, w = inside.shape
    sizes = np.zeros((h, w), dtype=int)
    seen = np.zeros((h, w), dtype=bool)
    for sy in range(h):
        for sx in range(w):
            if not inside[sy, sx] or seen[sy, sx]:
                continue
            queue = [(sy, sx)]
            seen[sy, sx] = True
            component = []
            while queue:
                y, x = queue.pop()
                component.append((y, x))
                for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
                    if 0 <= ny < h and 0 <= nx < w and inside[ny, nx] and not seen[ny, nx]:
                        seen[ny, nx] = True
                        queue.append((ny, nx))
            for y, x in component:
                sizes[y, x] = len(component)
    return sizes


def heapq_grow_oracle(colors, height, width, seeds, theta):
    """Pure-Python mirror of the compiled growth kernel: lazy-deletion
    heapq, running means, candidates pushed in (up, down, left, right)
    order, re-checked against the current mean on pop."""
    n = height * width
    labels = np.full(n, -1, dtype=np.int32)
    k = len(seeds)
    sums = np.zeros((k, 3), dtype=np.float64)
    counts = np.zeros(k, dtype=np.int64)
    for i, p in enumerate(seeds):
        labels[p] = i
        sums[i] = colors[p].astype(np.float64)
        counts[i] = 1

    def neighbors(p):
        y, x = divmod(p, width)
        if y > 0:
            yield p - width
        if y < height - 1:
            yield p + width
        if x > 0:
            yield p - 1
        if x < width - 1:
            yield p + 1

    heap = []
    tick = 0
    for i, p in enumerate(seeds):
        mean = sums[i] / counts[i]
        for q in neighbors(p):
            if labels[q] != -1:
                continue
            d = math.sqrt(
                (float(colors[q, 0]) - mean[0]) ** 2
                + (float(colors[q, 1]) - mean[1]) ** 2
                + (float(colors[q, 2]) - mean[2]) ** 2
            )
            if d <= theta:
                heapq.heappush(heap, (d, tick, q, i))
                tick += 1
    while heap:
        _, _, p, c = heapq.heappop(heap)
        if labels[p] != -1:
            continue
        mean = sums[c] / counts[c]
        d = math.sqrt(
            (float(colors[p, 0]) - mean[0]) ** 2
            + (float(colors[p, 1]) - mean[1]) ** 2
            + (float(colors[p, 2]) - mean[2]) ** 2
        )
        if d > theta:
            continue
        labels[p] = c
        sums[c] += colors[p].astype(np.float64)
        counts[c] += 1
        mean = sums[c] / counts[c]
        for q in neighbors(p):
            if labels[q] != -1:
                continue
            d = math.sqrt(
                (float(colors[q, 0]) - mean[0]) ** 2
                + (float(colors[q, 1]) - mean[1]) ** 2
                + (float(colors[q, 2]) - mean[2]) ** 2
            )
            if d <= theta:
                heapq.heappush(heap, (d, tick, q, c))
                tick += 1
    return labels, sums, counts


def unique_color_image(height: int, width: int, rng: np.random.Generator) -> RasterImage:
    """Image where no two pixels share a color (so growth with theta = 0
    leaves every pixel a singleton). Red stays free for score encoding."""
    idx = np.arange(height * width, dtype=np.uint32).reshape(height, width)
    arr = np.empty((height, width, 3), dtype=np.uint8)
    arr[..., 0] = rng.integers(0, 256, (height, width), dtype=np.uint8)
    arr[..., 1] = (idx // 256) % 256
    arr[..., 2] = idx % 256
    if height * width > 256 * 256:
        arr[..., 0] = (idx // (256 * 256)) % 256
    return RasterImage(arr)


def make_disk_fixture(size: int = 512, radius: float = 150.0):
    """White disk on a green field plus the matching probability map:
    0.8 on the disk eroded by 3 px, 0.5 in the 3-px uncertainty band
    inside the disk boundary, 0.05 outside. The construction itself is
    the ground truth."""
    yy, xx = np.mgrid[0:size, 0:size]
    center = size / 2.0
    dist = np.sqrt((xx - center) ** 2 + (yy - center) ** 2)
    disk = dist <= radius
    img = np.empty((size, size, 3), dtype=np.uint8)
    img[...] = (40, 160, 40)
    img[disk] = (255, 255, 255)
    prob = np.full((size, size), 0.05)
    prob[disk] = 0.5
    prob[dist <= radius - 3] = 0.8
    return RasterImage(img), ScoreMap(prob), disk


@pytest.fixture(scope="session")
def disk_fixture():
    return make_disk_fixture()


@pytest.fixture(scope="session")
def rgr_warmup():
    """Trigger JIT compilation of the growth kernel once, so timed tests
    measure the algorithm rather than the compiler."""
    import flowerseg as fs

    rng = np.random.default_rng(7)
    img = RasterImage(rng.integers(0, 256, (16, 16, 3), dtype=np.uint8))
    prob = ScoreMap(rng.uniform(0.0, 1.0, (16, 16)))
    fs.refine(img, prob, fs.RgrParams(mc_runs=1))
