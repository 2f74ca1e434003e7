"""numba-compiled kernels (scalar inner loops)."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _raycast_scan(grid, x0, y0, dirx, diry, cell_size, max_range):
    n = dirx.shape[0]
    nx, ny = grid.shape
    depths = np.empty(n, dtype=np.float64)
    classes = np.zeros(n, dtype=np.int32)
    for i in range(n):
        dx = dirx[i]
        dy = diry[i]
        ix = int(np.floor(x0 / cell_size))
        iy = int(np.floor(y0 / cell_size))
        if ix < 0 or ix >= nx or iy < 0 or iy >= ny:
            depths[i] = max_range
            continue
        if grid[ix, iy] != 0:
            depths[i] = 0.0
            classes[i] = grid[ix, iy]
            continue
        step_x = 1 if dx > 0.0 else -1
        step_y = 1 if dy > 0.0 else -1
        if dx != 0.0:
            tdx = abs(cell_size / dx)
            nxt = (ix + 1) * cell_size if dx > 0.0 else ix * cell_size
            tx = (nxt - x0) / dx
        else:
            tdx = np.inf
            tx = np.inf
        if dy != 0.0:
            tdy = abs(cell_size / dy)
            nyt = (iy + 1) * cell_size if dy > 0.0 else iy * cell_size
            ty = (nyt - y0) / dy
        else:
            tdy = np.inf
            ty = np.inf
        depth = max_range
        hit = 0
        while True:
            if tx <= ty:
                t = tx
                tx += tdx
                ix += step_x
            else:
                t = ty
                ty += tdy
                iy += step_y
            if t > max_range:
                break
            if ix < 0 or ix >= nx or iy < 0 or iy >= ny:
                break
            c = grid[ix, iy]
            if c != 0:
                depth = t
                hit = c
                break
        depths[i] = depth
        classes[i] = hit
    return depths, classes


@njit(cache=True)
def _dtw_cost(a, b):
    n = a.shape[0]
    m = b.shape[0]
    prev = np.empty(m + 1, dtype=np.float64)
    cur = np.empty(m + 1, dtype=np.float64)
    for j in range(m + 1):
        prev[j] = np.inf
    prev[0] = 0.0
    for i in range(1, n + 1):
        cur[0] = np.inf
        for j in range(1, m + 1):
            ddx = a[i - 1, 0] - b[j - 1, 0]
            ddy = a[i - 1, 1] - b[j - 1, 1]
            d = np.sqrt(ddx * ddx + ddy * ddy)
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = d + best
        for j in range(m + 1):
            prev[j] = cur[j]
    return prev[m]


def raycast_scan(grid, x0, y0, dirx, diry, cell_size, max_range):
    return _raycast_scan(
        np.ascontiguousarray(grid, dtype=np.int32), float(x0), float(y0),
        np.ascontiguousarray(dirx, dtype=np.float64),
        np.ascontiguousarray(diry, dtype=np.float64),
        float(cell_size), float(max_range))


def dtw_cost(a, b):
    return float(_dtw_cost(
        np.ascontiguousarray(a, dtype=np.float64),
        np.ascontiguousarray(b, dtype=np.float64)))
