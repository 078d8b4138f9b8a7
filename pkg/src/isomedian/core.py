"""Sliding-window rank selection over one rank-transformed tile.

Every output pixel is the window element at a target rank.  Rather than
keeping an explicit histogram per window, each window carries a *pivot* (a
rank index quantized to a multiple of 64) and a *count* (how many window
pixels have rank strictly below the pivot).  Sliding the window one pixel
updates the count by comparing only the entering and exiting pixels against
the pivot; the exact answer is then recovered by scanning the rank->position
map outward from the pivot in 64-rank segments, using occupancy-bitmask
popcounts as coarse histogram bins.

A tile is solved top-left pixel first (direct coarse-histogram seed), then
across the top row by horizontal slides, then row by row with vertical
slides.  The last row's solutions can seed the tile below: the spatial
offset of a window's solution pixel from the window center is the same in
both tiles, so the solution rank in the next tile is a single rank-image
lookup.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .kernels import KernelShape
from .ordinal import OrdinalTile, _inside, _segment_mask


class ScanDefectError(RuntimeError):
    """A segment scan ran off the end of the rank array.

    This means a window count was inconsistent with its pivot, which is an
    internal invariant violation, never an input-data condition.
    """


@njit(cache=True, nogil=True, inline="always")
def _select_pivot(m, n):
    """Nearest multiple of 64 to m (ties up), clamped to the last segment base."""
    p = 64 * ((m + 32) >> 6)
    cap = 64 * ((n - 1) >> 6)
    return p if p <= cap else cap


@njit(cache=True, nogil=True)
def _seed_state(ranks, cx, cy, off_dx, off_dy, target, n):
    """Pivot and count for a fresh window, via a coarse 64-bin histogram."""
    nbins = ((n - 1) >> 6) + 1
    hist = np.zeros(nbins, np.int64)
    for i in range(off_dx.shape[0]):
        v = ranks[cy + off_dy[i], cx + off_dx[i]]
        hist[v >> 6] += 1
    c = 0
    b = 0
    while c + hist[b] <= target:
        c += hist[b]
        b += 1
    return 64 * b, c


@njit(cache=True, nogil=True)
def _slide_right(ranks, cx, cy, pivot, count, row_dy, row_xlo, row_xhi):
    """Count update as the window center moves from (cx, cy) to (cx+1, cy)."""
    for i in range(row_dy.shape[0]):
        y = cy + row_dy[i]
        if ranks[y, cx + row_xhi[i]] < pivot:
            count += 1
        if ranks[y, cx + row_xlo[i]] < pivot:
            count -= 1
    return count


@njit(cache=True, nogil=True)
def _slide_down(ranks, cx, cy, pivot, count, col_dx, col_ytop, col_ybot):
    """Count update as the window center moves from (cx, cy) to (cx, cy+1)."""
    for i in range(col_dx.shape[0]):
        x = cx + col_dx[i]
        if ranks[cy + col_ybot[i] + 1, x] < pivot:
            count += 1
        if ranks[cy + col_ytop[i], x] < pivot:
            count -= 1
    return count


@njit(cache=True, nogil=True)
def _refine(pos_x, pos_y, n, cx, cy, pivot, count, target,
            code, lim, rad, planes):
    """Scan segments from the pivot to the exact solution rank.

    Returns (m, new_pivot, new_count) with the state re-anchored at the
    nearest segment base to m; m == -1 signals an inconsistent count.
    """
    cap = 64 * ((n - 1) >> 6)
    if count <= target:
        s = pivot >> 6
        c = count  # count at rank 64*s
        while True:
            if s * 64 >= n:
                return -1, 0, 0
            mask, pop = _segment_mask(pos_x, pos_y, n, s, cx, cy,
                                      code, lim, rad, planes)
            if c + pop > target:
                need = target - c
                m = -1
                seen = 0
                for k in range(64):
                    if (mask >> np.uint64(k)) & np.uint64(1):
                        if seen == need:
                            m = s * 64 + k
                            break
                        seen += 1
                npiv = 64 * ((m + 32) >> 6)
                if npiv > cap:
                    npiv = cap
                ncount = c if npiv == 64 * s else c + pop
                return m, npiv, ncount
            c += pop
            s += 1
    else:
        s = pivot >> 6
        c = count  # count at rank 64*s
        while True:
            s -= 1
            if s < 0:
                return -1, 0, 0
            mask, pop = _segment_mask(pos_x, pos_y, n, s, cx, cy,
                                      code, lim, rad, planes)
            base_c = c - pop
            if base_c <= target:
                need = target - base_c
                m = -1
                seen = 0
                for k in range(64):
                    if (mask >> np.uint64(k)) & np.uint64(1):
                        if seen == need:
                            m = s * 64 + k
                            break
                        seen += 1
                npiv = 64 * ((m + 32) >> 6)
                if npiv > cap:
                    npiv = cap
                ncount = base_c if npiv == 64 * s else c
                return m, npiv, ncount
            c = base_c


@njit(cache=True, nogil=True)
def _forwarded_states(pos_x, pos_y, n, cx0, cy, seed_m, seed_targets,
                      code, lim, rad, planes, pivots, counts):
    """Pivot/count per column from known solution ranks of the seed row.

    The solution rank of a window sits exactly at its target rank, so the
    count at a nearby pivot follows from counting window members in the rank
    interval between pivot and solution.
    """
    for j in range(seed_m.shape[0]):
        cx = cx0 + j
        m = seed_m[j]
        piv = _select_pivot(m, n)
        c = seed_targets[j]
        if piv <= m:
            for v in range(piv, m):
                if _inside(pos_x[v] - cx, pos_y[v] - cy, code, lim, rad, planes):
                    c -= 1
        else:
            for v in range(m, piv):
                if _inside(pos_x[v] - cx, pos_y[v] - cy, code, lim, rad, planes):
                    c += 1
        pivots[j] = piv
        counts[j] = c


@njit(cache=True, nogil=True)
def _process_tile(ranks, pos_x, pos_y, n, code, lim, rad, planes,
                  off_dx, off_dy, row_dy, row_xlo, row_xhi,
                  col_dx, col_ytop, col_ybot,
                  cx0, cy0, targets, seeded, seed_pivots, seed_counts,
                  m_out, pivots, counts):
    """Solve all output pixels of one tile; returns 0 on success."""
    out_h, out_w = m_out.shape
    if seeded:
        for j in range(out_w):
            pivots[j] = seed_pivots[j]
            counts[j] = seed_counts[j]
        row_start = 0
    else:
        piv, c = _seed_state(ranks, cx0, cy0, off_dx, off_dy, targets[0, 0], n)
        m, piv, c = _refine(pos_x, pos_y, n, cx0, cy0, piv, c, targets[0, 0],
                            code, lim, rad, planes)
        if m < 0:
            return 1
        m_out[0, 0] = m
        pivots[0] = piv
        counts[0] = c
        for j in range(1, out_w):
            c = _slide_right(ranks, cx0 + j - 1, cy0, piv, c,
                             row_dy, row_xlo, row_xhi)
            m, piv, c = _refine(pos_x, pos_y, n, cx0 + j, cy0, piv, c,
                                targets[0, j], code, lim, rad, planes)
            if m < 0:
                return 1
            m_out[0, j] = m
            pivots[j] = piv
            counts[j] = c
        row_start = 1
    for i in range(row_start, out_h):
        cy = cy0 + i
        for j in range(out_w):
            cx = cx0 + j
            c = _slide_down(ranks, cx, cy - 1, pivots[j], counts[j],
                            col_dx, col_ytop, col_ybot)
            m, piv, c = _refine(pos_x, pos_y, n, cx, cy, pivots[j], c,
                                targets[i, j], code, lim, rad, planes)
            if m < 0:
                return 1
            m_out[i, j] = m
            pivots[j] = piv
            counts[j] = c
    return 0


# ---------------------------------------------------------------------------
# Python-level API
# ---------------------------------------------------------------------------

@dataclass
class WindowState:
    """Mutable cursor for one window: center, pivot, count, last solution."""

    cx: int
    cy: int
    pivot: int
    count: int
    target: int
    last_median: int = -1


@dataclass
class RowSolution:
    """Per-column solutions of one output row, for forwarding."""

    m: np.ndarray        # solution ranks
    off_dx: np.ndarray   # solution pixel offset from the window center
    off_dy: np.ndarray
    pivot: np.ndarray
    count: np.ndarray
    center_x0: int       # tile-local center of column 0
    center_y: int


def select_pivot(m: int, count: int) -> int:
    """Nearest multiple of 64 to rank m, clamped to the last segment base.

    `count` is the tile's participating pixel count (the rank range).
    """
    if not 0 <= m < count:
        raise ValueError(f"rank {m} out of range")
    return int(_select_pivot(m, count))


def _shape_args(kernel: KernelShape):
    return kernel.shape_code, kernel.lim, kernel.radius, kernel.planes


def refine(state: WindowState, ot: OrdinalTile, kernel: KernelShape) -> int:
    """Exact solution rank for the window; re-anchors pivot and count."""
    m, piv, c = _refine(ot.pos_x, ot.pos_y, ot.count, state.cx, state.cy,
                        state.pivot, state.count, state.target,
                        *_shape_args(kernel))
    if m < 0:
        raise ScanDefectError(
            f"segment scan exhausted at window ({state.cx}, {state.cy}); "
            "pivot/count state was inconsistent")
    state.pivot = int(piv)
    state.count = int(c)
    state.last_median = int(m)
    return int(m)


def solve_seed(ot: OrdinalTile, kernel: KernelShape, center: tuple[int, int],
               target: int) -> tuple[int, WindowState]:
    """Solve one window from scratch via a coarse histogram of its ranks."""
    cx, cy = center
    piv, c = _seed_state(ot.ranks, cx, cy, kernel.off_dx, kernel.off_dy,
                         target, ot.count)
    state = WindowState(cx=cx, cy=cy, pivot=int(piv), count=int(c), target=target)
    m = refine(state, ot, kernel)
    return m, state


def slide_horizontal(state: WindowState, ot: OrdinalTile,
                     kernel: KernelShape) -> WindowState:
    """Move the window one pixel right, updating the count against the pivot."""
    state.count = int(_slide_right(ot.ranks, state.cx, state.cy, state.pivot,
                                   state.count, kernel.row_dy, kernel.row_xlo,
                                   kernel.row_xhi))
    state.cx += 1
    return state


def slide_vertical_row(states: list[WindowState], ot: OrdinalTile,
                       kernel: KernelShape) -> list[WindowState]:
    """Move a row of windows one pixel down, updating each count."""
    for state in states:
        state.count = int(_slide_down(ot.ranks, state.cx, state.cy, state.pivot,
                                      state.count, kernel.col_dx,
                                      kernel.col_ytop, kernel.col_ybot))
        state.cy += 1
    return states


def process_tile(ot: OrdinalTile, kernel: KernelShape, targets: np.ndarray,
                 center0: tuple[int, int],
                 forwarded: RowSolution | None = None,
                 ) -> tuple[np.ndarray, RowSolution]:
    """Solve a rectangle of output pixels within one tile.

    `targets` is the (out_h, out_w) array of selection ranks; `center0` is
    the tile-local window center of output pixel (0, 0).  When `forwarded`
    is given it must be the solved row directly above the first output row
    (as produced by :func:`forward_solutions`), and the seed and first-row
    phases are skipped.  Returns the cardinal output tile and the last row's
    solutions.
    """
    targets = np.ascontiguousarray(targets, dtype=np.int64)
    out_h, out_w = targets.shape
    cx0, cy0 = center0
    m_out = np.empty((out_h, out_w), np.int32)
    pivots = np.empty(out_w, np.int64)
    counts = np.empty(out_w, np.int64)
    if forwarded is not None:
        if forwarded.center_y != cy0 - 1 or forwarded.center_x0 != cx0 \
                or forwarded.m.shape[0] != out_w:
            raise ValueError("forwarded row does not line up one row above "
                             "this tile's first output row")
        seeded = True
        seed_pivots = forwarded.pivot
        seed_counts = forwarded.count
    else:
        seeded = False
        seed_pivots = pivots
        seed_counts = counts
    status = _process_tile(ot.ranks, ot.pos_x, ot.pos_y, ot.count,
                           *_shape_args(kernel),
                           kernel.off_dx, kernel.off_dy,
                           kernel.row_dy, kernel.row_xlo, kernel.row_xhi,
                           kernel.col_dx, kernel.col_ytop, kernel.col_ybot,
                           cx0, cy0, targets, seeded, seed_pivots, seed_counts,
                           m_out, pivots, counts)
    if status != 0:
        raise ScanDefectError("segment scan exhausted while solving tile; "
                              "pivot/count state was inconsistent")
    last = m_out[-1]
    cy_last = cy0 + out_h - 1
    sol = RowSolution(
        m=last.copy(),
        off_dx=ot.pos_x[last] - (cx0 + np.arange(out_w, dtype=np.int32)),
        off_dy=ot.pos_y[last] - cy_last,
        pivot=pivots.copy(),
        count=counts.copy(),
        center_x0=cx0,
        center_y=cy_last,
    )
    return ot.values[m_out], sol


def forward_solutions(prev: RowSolution, ot_next: OrdinalTile,
                      kernel: KernelShape, shift: tuple[int, int],
                      seed_targets: np.ndarray) -> RowSolution:
    """Re-anchor a solved row in the tile below it.

    `shift` maps the previous tile's local coordinates into the next tile's
    local coordinates ((dy, dx), i.e. prev_local + shift == next_local).
    The solution pixel of each window keeps its offset from the window
    center across tiles, so its rank in the next tile is read directly from
    the rank image; pivot and count are rebuilt from membership tests around
    it, anchored at the known target rank.
    """
    dy, dx = shift
    out_w = prev.m.shape[0]
    cy = prev.center_y + dy
    cx0 = prev.center_x0 + dx
    px = cx0 + np.arange(out_w, dtype=np.int64) + prev.off_dx
    py = cy + prev.off_dy
    if (py < 0).any() or (py >= ot_next.height).any() \
            or (px < 0).any() or (px >= ot_next.width).any():
        raise ValueError("forwarded solution pixels fall outside the next "
                         "tile; the one-row overlap is missing")
    seed_m = ot_next.ranks[py, px].astype(np.int32)
    if (seed_m < 0).any():
        raise ValueError("forwarded solution pixel excluded by the next "
                         "tile's validity mask")
    seed_targets = np.ascontiguousarray(seed_targets, dtype=np.int64)
    pivots = np.empty(out_w, np.int64)
    counts = np.empty(out_w, np.int64)
    _forwarded_states(ot_next.pos_x, ot_next.pos_y, ot_next.count, cx0, cy,
                      seed_m, seed_targets, *_shape_args(kernel),
                      pivots, counts)
    return RowSolution(
        m=seed_m,
        off_dx=prev.off_dx.copy(),
        off_dy=prev.off_dy.copy(),
        pivot=pivots,
        count=counts,
        center_x0=int(cx0),
        center_y=int(cy),
    )


def bracket_filter(ot: OrdinalTile, kernel: KernelShape,
                   percentiles: list[float], center0: tuple[int, int],
                   out_shape: tuple[int, int]) -> list[np.ndarray]:
    """Filter one tile at several percentiles, reusing its rank transform."""
    from .kernels import target_rank

    if not percentiles:
        raise ValueError("percentile list is empty")
    outs = []
    for p in percentiles:
        t = target_rank(kernel.area, p)
        targets = np.full(out_shape, t, dtype=np.int64)
        out, _ = process_tile(ot, kernel, targets, center0)
        outs.append(out)
    return outs
