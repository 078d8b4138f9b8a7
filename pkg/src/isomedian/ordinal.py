"""Rank transform of an image tile.

A tile of cardinal (brightness) values is replaced by the tile of its sort
ranks 0..N-1, with duplicate values assigned consecutive ranks in row-major
scan order (stable).  Three arrays come out of the transform:

* ``ranks``    -- the rank image (a permutation of 0..N-1 over participating
  pixels; -1 where a validity mask excludes a pixel),
* ``pos_x``/``pos_y`` -- for each rank, the tile coordinates of the pixel
  holding it (the inverse of the rank image),
* ``values``   -- the cardinal values in ascending order, mapping a rank
  result back to a brightness.

Because ranks are unique, the histogram of any tile region over ranks is
binary, and the rank->position map answers "is rank v inside this window?"
in constant time.  Sliding-window selection runs entirely in rank space and
converts back through ``values`` at the end.

8- and 16-bit integer tiles are ranked with a single-pass bucket sort
(histogram + exclusive prefix sum + row-major re-scan); float32 tiles map
each value through an order-preserving integer key and run a two-pass
16-bit-digit stable radix sort on the keys.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .kernels import KernelShape, contains

MAX_TILE_SIDE = 256  # ranks fit 16 bits; positions fit 8 bits each


@dataclass(frozen=True)
class OrdinalTile:
    """Immutable product of the rank transform of one tile."""

    ranks: np.ndarray   # (h, w) int32; -1 for non-participating pixels
    pos_x: np.ndarray   # (count,) int32
    pos_y: np.ndarray   # (count,) int32
    values: np.ndarray  # (count,) original dtype, ascending
    count: int

    @property
    def width(self) -> int:
        return self.ranks.shape[1]

    @property
    def height(self) -> int:
        return self.ranks.shape[0]

    @property
    def packed_positions(self) -> np.ndarray:
        """Positions packed 16-bit: x in the low byte, y in the high byte."""
        return (self.pos_x.astype(np.uint16)
                | (self.pos_y.astype(np.uint16) << 8))


@njit(cache=True, nogil=True)
def _rank_by_bucket(vals, nbuckets):
    """Stable single-pass bucket ranks of small-integer values."""
    n = vals.shape[0]
    hist = np.zeros(nbuckets, np.int32)
    for i in range(n):
        hist[vals[i]] += 1
    total = 0
    for k in range(nbuckets):
        c = hist[k]
        hist[k] = total
        total += c
    out = np.empty(n, np.int32)
    for i in range(n):
        c = vals[i]
        out[i] = hist[c]
        hist[c] += 1
    return out


@njit(cache=True, nogil=True)
def _rank_by_radix16(keys):
    """Stable ranks of uint32 keys via two 16-bit counting passes."""
    n = keys.shape[0]
    perm = np.arange(n)
    tmp = np.empty(n, np.int64)
    hist = np.empty(65536, np.int64)
    for shift in (0, 16):
        hist[:] = 0
        for i in range(n):
            hist[(keys[perm[i]] >> shift) & 0xFFFF] += 1
        total = 0
        for k in range(65536):
            c = hist[k]
            hist[k] = total
            total += c
        for i in range(n):
            d = (keys[perm[i]] >> shift) & 0xFFFF
            tmp[hist[d]] = perm[i]
            hist[d] += 1
        perm, tmp = tmp, perm
    out = np.empty(n, np.int32)
    for v in range(n):
        out[perm[v]] = v
    return out


def float_order_key(values) -> np.ndarray | np.uint32:
    """Map float32 values to uint32 keys that sort in numeric order.

    The exponent and mantissa bits are XORed by the sign bit and the sign
    bit is flipped, making unsigned integer comparison agree with the IEEE
    total order over non-NaN values (-0.0 sorts before +0.0).
    """
    arr = np.asarray(values, dtype="<f4")
    if np.isnan(arr).any():
        raise ValueError("float_order_key is undefined for NaN")
    u = arr.view(np.uint32)
    key = np.where(u >> 31, ~u, u | np.uint32(0x80000000))
    if np.isscalar(values) or arr.ndim == 0:
        return np.uint32(key)
    return key.astype(np.uint32)


def ordinal_transform(tile: np.ndarray, valid_mask: np.ndarray | None = None) -> OrdinalTile:
    """Rank-transform a 2D tile; masked-out pixels do not participate."""
    tile = np.ascontiguousarray(tile)
    if tile.ndim != 2:
        raise ValueError("tile must be 2D")
    h, w = tile.shape
    if h > MAX_TILE_SIDE or w > MAX_TILE_SIDE or h * w > 65536 or h * w == 0:
        raise ValueError(f"tile dimensions {h}x{w} out of range (max 256 per side)")

    if valid_mask is None:
        vals = tile.reshape(-1)
        ys, xs = np.divmod(np.arange(h * w, dtype=np.int32), np.int32(w))
    else:
        valid_mask = np.asarray(valid_mask, dtype=bool)
        if valid_mask.shape != tile.shape:
            raise ValueError("valid_mask shape must match the tile")
        ys, xs = np.nonzero(valid_mask)  # row-major order
        ys = ys.astype(np.int32)
        xs = xs.astype(np.int32)
        vals = tile[valid_mask]
    n = vals.shape[0]
    if n == 0:
        raise ValueError("tile has no participating pixels")

    if tile.dtype == np.uint8:
        ranks_flat = _rank_by_bucket(vals.astype(np.int64), 256)
    elif tile.dtype == np.uint16:
        ranks_flat = _rank_by_bucket(vals.astype(np.int64), 65536)
    elif tile.dtype == np.float32:
        if np.isnan(vals).any():
            raise ValueError("tile contains NaN; NaN has no rank under the "
                             "total order used by this filter")
        ranks_flat = _rank_by_radix16(float_order_key(vals))
    else:
        raise ValueError(f"unsupported tile dtype {tile.dtype}; "
                         "use uint8, uint16, or float32")

    ranks = np.full((h, w), -1, dtype=np.int32)
    ranks[ys, xs] = ranks_flat
    pos_x = np.empty(n, np.int32)
    pos_y = np.empty(n, np.int32)
    values = np.empty(n, tile.dtype)
    pos_x[ranks_flat] = xs
    pos_y[ranks_flat] = ys
    values[ranks_flat] = vals
    return OrdinalTile(ranks=ranks, pos_x=pos_x, pos_y=pos_y,
                       values=values, count=int(n))


@njit(cache=True, nogil=True, inline="always")
def _inside(dx, dy, code, lim, rad, planes):
    """Kernel membership in centered offsets; mirrors kernels.contains."""
    if code == 0:
        return 4 * (dx * dx + dy * dy) <= lim
    if code == 1:
        return -rad <= dx <= rad and -rad <= dy <= rad
    for i in range(planes.shape[0]):
        if planes[i, 0] * dx + planes[i, 1] * dy > planes[i, 2]:
            return False
    return True


@njit(cache=True, nogil=True)
def _segment_mask(pos_x, pos_y, n, seg, cx, cy, code, lim, rad, planes):
    """64-bit window-occupancy mask of ranks [64*seg, 64*seg+64)."""
    base = seg * 64
    end = min(base + 64, n)
    mask = np.uint64(0)
    pop = 0
    for v in range(base, end):
        if _inside(pos_x[v] - cx, pos_y[v] - cy, code, lim, rad, planes):
            mask |= np.uint64(1) << np.uint64(v - base)
            pop += 1
    return mask, pop


def window_membership(ot: OrdinalTile, rank: int, center: tuple[int, int],
                      kernel: KernelShape) -> int:
    """Binary histogram element: 1 iff the pixel holding `rank` lies in the window."""
    if not 0 <= rank < ot.count:
        raise ValueError(f"rank {rank} out of range")
    cx, cy = center
    return int(contains(kernel.spec, int(ot.pos_x[rank]) - cx,
                        int(ot.pos_y[rank]) - cy))


def segment_mask(ot: OrdinalTile, segment: int, center: tuple[int, int],
                 kernel: KernelShape) -> tuple[int, int]:
    """Occupancy bitmask and popcount for one 64-rank segment."""
    if not 0 <= 64 * segment < ot.count:
        raise ValueError(f"segment {segment} out of range")
    cx, cy = center
    mask, pop = _segment_mask(ot.pos_x, ot.pos_y, ot.count, segment, cx, cy,
                              kernel.shape_code, kernel.lim, kernel.radius,
                              kernel.planes)
    return int(mask), int(pop)
