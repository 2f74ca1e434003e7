"""Pure-numpy kernel fallbacks.

The raycast advances every ray through the grid in lockstep with masked
vector updates; per-ray state and update formulas mirror the numba kernel
exactly (same additions, same tie-break), so results are bit-identical
across backends. The DTW fallback keeps the scalar recurrence in Python for
the same reason.
"""

from __future__ import annotations

import math

import numpy as np


def raycast_scan(grid, x0, y0, dirx, diry, cell_size, max_range):
    grid = np.ascontiguousarray(grid, dtype=np.int32)
    dirx = np.ascontiguousarray(dirx, dtype=np.float64)
    diry = np.ascontiguousarray(diry, dtype=np.float64)
    x0 = float(x0)
    y0 = float(y0)
    cell_size = float(cell_size)
    max_range = float(max_range)

    n = dirx.shape[0]
    nx, ny = grid.shape
    depths = np.full(n, max_range, dtype=np.float64)
    classes = np.zeros(n, dtype=np.int32)

    ix0 = int(np.floor(x0 / cell_size))
    iy0 = int(np.floor(y0 / cell_size))
    if ix0 < 0 or ix0 >= nx or iy0 < 0 or iy0 >= ny:
        return depths, classes
    if grid[ix0, iy0] != 0:
        depths[:] = 0.0
        classes[:] = grid[ix0, iy0]
        return depths, classes

    ix = np.full(n, ix0, dtype=np.int64)
    iy = np.full(n, iy0, dtype=np.int64)
    step_x = np.where(dirx > 0.0, 1, -1).astype(np.int64)
    step_y = np.where(diry > 0.0, 1, -1).astype(np.int64)

    with np.errstate(divide="ignore", invalid="ignore"):
        tdx = np.where(dirx != 0.0, np.abs(cell_size / dirx), np.inf)
        tdy = np.where(diry != 0.0, np.abs(cell_size / diry), np.inf)
        nxt = np.where(dirx > 0.0, (ix0 + 1) * cell_size, ix0 * cell_size)
        nyt = np.where(diry > 0.0, (iy0 + 1) * cell_size, iy0 * cell_size)
        tx = np.where(dirx != 0.0, (nxt - x0) / dirx, np.inf)
        ty = np.where(diry != 0.0, (nyt - y0) / diry, np.inf)

    active = np.ones(n, dtype=bool)
    while active.any():
        use_x = active & (tx <= ty)
        use_y = active & ~use_x
        t = np.where(use_x, tx, ty)
        tx = np.where(use_x, tx + tdx, tx)
        ix = np.where(use_x, ix + step_x, ix)
        ty = np.where(use_y, ty + tdy, ty)
        iy = np.where(use_y, iy + step_y, iy)

        over = active & (t > max_range)
        active &= ~over
        outside = active & ((ix < 0) | (ix >= nx) | (iy < 0) | (iy >= ny))
        active &= ~outside

        if active.any():
            c = grid[ix[active], iy[active]]
            hit_local = c != 0
            if hit_local.any():
                hit = np.where(active)[0][hit_local]
                depths[hit] = t[hit]
                classes[hit] = c[hit_local]
                active[hit] = False
    return depths, classes


def dtw_cost(a, b):
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    n, m = a.shape[0], b.shape[0]
    prev = [math.inf] * (m + 1)
    prev[0] = 0.0
    for i in range(1, n + 1):
        cur = [math.inf] * (m + 1)
        ax, ay = a[i - 1, 0], a[i - 1, 1]
        for j in range(1, m + 1):
            ddx = ax - b[j - 1, 0]
            ddy = ay - b[j - 1, 1]
            d = math.sqrt(ddx * ddx + ddy * ddy)
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = d + best
        prev = cur
    return float(prev[m])
