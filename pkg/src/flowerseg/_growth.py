"""Best-first seeded region growing, compiled with numba.

The kernel below is the inner loop of refinement: starting from seed
pixels (one cluster each), it repeatedly attaches the candidate pixel
with the smallest color distance to an adjacent cluster's running mean,
as long as that distance is within the tolerance. Candidates enter the
queue when a neighboring pixel is attached; distances are re-checked
against the current mean when a candidate is popped, so a cluster whose
mean drifted away no longer accepts it. Ties are broken by insertion
order, which makes the whole process deterministic.

Pixels are addressed by flat row-major index; colors are (n, 3) float32
in [0, 1]. Growth uses 4-connectivity.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _sift_up(hd, ht, hp, hc, i):
    while i > 0:
        parent = (i - 1) >> 1
        if hd[i] < hd[parent] or (hd[i] == hd[parent] and ht[i] < ht[parent]):
            hd[i], hd[parent] = hd[parent], hd[i]
            ht[i], ht[parent] = ht[parent], ht[i]
            hp[i], hp[parent] = hp[parent], hp[i]
            hc[i], hc[parent] = hc[parent], hc[i]
            i = parent
        else:
            break


@njit(cache=True, nogil=True)
def _sift_down(hd, ht, hp, hc, size):
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        right = left + 1
        small = left
        if right < size and (
            hd[right] < hd[left] or (hd[right] == hd[left] and ht[right] < ht[left])
        ):
            small = right
        if hd[small] < hd[i] or (hd[small] == hd[i] and ht[small] < ht[i]):
            hd[i], hd[small] = hd[small], hd[i]
            ht[i], ht[small] = ht[small], ht[i]
            hp[i], hp[small] = hp[small], hp[i]
            hc[i], hc[small] = hc[small], hc[i]
            i = small
        else:
            break


@njit(cache=True, nogil=True)
def grow_clusters(colors, height, width, labels, seeds, theta):
    """Grow clusters in place in `labels` (int32, -1 = unassigned).

    Seed i becomes cluster i. Returns per-cluster color sums (k, 3)
    float64 and sizes (k,) int64. Pixels never attached keep label -1.
    """
    n_seeds = seeds.shape[0]
    sums = np.zeros((n_seeds, 3), dtype=np.float64)
    counts = np.zeros(n_seeds, dtype=np.int64)
    for i in range(n_seeds):
        p = seeds[i]
        labels[p] = i
        sums[i, 0] = colors[p, 0]
        sums[i, 1] = colors[p, 1]
        sums[i, 2] = colors[p, 2]
        counts[i] = 1

    cap = 4096
    hd = np.empty(cap, dtype=np.float64)  # distance (primary key)
    ht = np.empty(cap, dtype=np.int64)  # insertion tick (tie-break)
    hp = np.empty(cap, dtype=np.int64)  # flat pixel index
    hc = np.empty(cap, dtype=np.int32)  # cluster id
    size = 0
    tick = 0

    # Seed the frontier with the neighbors of every seed pixel.
    for i in range(n_seeds):
        p = seeds[i]
        y = p // width
        x = p % width
        mr = sums[i, 0] / counts[i]
        mg = sums[i, 1] / counts[i]
        mb = sums[i, 2] / counts[i]
        for d in range(4):
            if d == 0:
                if y == 0:
                    continue
                q = p - width
            elif d == 1:
                if y == height - 1:
                    continue
                q = p + width
            elif d == 2:
                if x == 0:
                    continue
                q = p - 1
            else:
                if x == width - 1:
                    continue
                q = p + 1
            if labels[q] != -1:
                continue
            dr = colors[q, 0] - mr
            dg = colors[q, 1] - mg
            db = colors[q, 2] - mb
            dist = math.sqrt(dr * dr + dg * dg + db * db)
            if dist > theta:
                continue
            if size == cap:
                cap *= 2
                nd = np.empty(cap, dtype=np.float64)
                nt = np.empty(cap, dtype=np.int64)
                np_ = np.empty(cap, dtype=np.int64)
                nc = np.empty(cap, dtype=np.int32)
                nd[:size] = hd
                nt[:size] = ht
                np_[:size] = hp
                nc[:size] = hc
                hd, ht, hp, hc = nd, nt, np_, nc
            hd[size] = dist
            ht[size] = tick
            hp[size] = q
            hc[size] = i
            _sift_up(hd, ht, hp, hc, size)
            size += 1
            tick += 1

    while size > 0:
        p = hp[0]
        c = hc[0]
        size -= 1
        hd[0] = hd[size]
        ht[0] = ht[size]
        hp[0] = hp[size]
        hc[0] = hc[size]
        _sift_down(hd, ht, hp, hc, size)
        if labels[p] != -1:
            continue
        cnt = counts[c]
        mr = sums[c, 0] / cnt
        mg = sums[c, 1] / cnt
        mb = sums[c, 2] / cnt
        dr = colors[p, 0] - mr
        dg = colors[p, 1] - mg
        db = colors[p, 2] - mb
        if math.sqrt(dr * dr + dg * dg + db * db) > theta:
            continue
        labels[p] = c
        sums[c, 0] += colors[p, 0]
        sums[c, 1] += colors[p, 1]
        sums[c, 2] += colors[p, 2]
        counts[c] += 1
        mr = sums[c, 0] / counts[c]
        mg = sums[c, 1] / counts[c]
        mb = sums[c, 2] / counts[c]
        y = p // width
        x = p % width
        for d in range(4):
            if d == 0:
                if y == 0:
                    continue
                q = p - width
            elif d == 1:
                if y == height - 1:
                    continue
                q = p + width
            elif d == 2:
                if x == 0:
                    continue
                q = p - 1
            else:
                if x == width - 1:
                    continue
                q = p + 1
            if labels[q] != -1:
                continue
            dr = colors[q, 0] - mr
            dg = colors[q, 1] - mg
            db = colors[q, 2] - mb
            dist = math.sqrt(dr * dr + dg * dg + db * db)
            if dist > theta:
                continue
            if size == cap:
                cap *= 2
                nd = np.empty(cap, dtype=np.float64)
                nt = np.empty(cap, dtype=np.int64)
                np_ = np.empty(cap, dtype=np.int64)
                nc = np.empty(cap, dtype=np.int32)
                nd[:size] = hd
                nt[:size] = ht
                np_[:size] = hp
                nc[:size] = hc
                hd, ht, hp, hc = nd, nt, np_, nc
            hd[size] = dist
            ht[size] = tick
            hp[size] = q
            hc[size] = c
            _sift_up(hd, ht, hp, hc, size)
            size += 1
            tick += 1

    return sums, counts
