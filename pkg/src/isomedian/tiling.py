"""Image decomposition into tiles and the end-to-end filter entry point.

The image is cut into output tiles small enough that each padded input tile
fits the 256-pixel side cap required by the 8+8-bit position encoding of the
rank->position map.  Tiles in a column run top to bottom so each tile's last
solved row can seed the tile below (forwarding); with forwarding disabled,
every tile is independent.  Output writes are disjoint per tile, so results
are identical for any worker count or schedule.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .kernels import MAX_RADIUS, ShapeSpec, make_kernel, target_rank
from .core import forward_solutions, process_tile
from .ordinal import ordinal_transform

MAX_TILE_SIDE = 256
DEFAULT_OUTPUT_TILE = 64


@dataclass(frozen=True)
class FilterParams:
    """Filter-level parameters: kernel, percentile, boundary, and tiling."""

    shape: ShapeSpec
    percentile: float | np.ndarray = 0.5
    boundary: str = "replicate"
    forwarding: bool = True
    tile_size: int | None = None
    workers: int | None = None
    footprint_mask: bool = False  # exclude input corners unreachable by any window

    def __post_init__(self):
        if self.boundary not in ("replicate", "valid"):
            raise ValueError(f"unknown boundary mode {self.boundary!r}")
        if np.isscalar(self.percentile) or np.ndim(self.percentile) == 0:
            p = float(self.percentile)
            if not 0.0 <= p <= 1.0:
                raise ValueError("percentile must be in [0, 1]")


@dataclass(frozen=True)
class Tile:
    """One tile: output rectangle plus the padded input rectangle it reads.

    Output coordinates index the output image; input coordinates index the
    padded image.  A seeded tile reads one extra input row above so the row
    solved by the tile above it can be re-anchored here.
    """

    out_x0: int
    out_y0: int
    out_w: int
    out_h: int
    seeded: bool
    radius: int

    @property
    def in_x0(self) -> int:
        return self.out_x0

    @property
    def in_y0(self) -> int:
        return self.out_y0 - (1 if self.seeded else 0)

    @property
    def in_w(self) -> int:
        return self.out_w + 2 * self.radius

    @property
    def in_h(self) -> int:
        return self.out_h + 2 * self.radius + (1 if self.seeded else 0)


@dataclass(frozen=True)
class TileGrid:
    out_h: int
    out_w: int
    tile_size: int
    columns: list[list[Tile]]  # tiles per column, top to bottom
    forwarding: bool

    @property
    def tiles(self) -> list[Tile]:
        return [t for col in self.columns for t in col]


def decompose(image_shape: tuple[int, int], params: FilterParams) -> TileGrid:
    """Cut the output plane into tiles honoring the 256-pixel input cap."""
    r = params.shape.radius
    if r > MAX_RADIUS:
        raise ValueError(
            f"radius {r} exceeds the maximum of {MAX_RADIUS} (input tiles "
            "are capped at 256 pixels per side)")
    h, w = image_shape
    if params.boundary == "valid":
        h, w = h - 2 * r, w - 2 * r
        if h <= 0 or w <= 0:
            raise ValueError("image smaller than the kernel in valid mode")
    if h <= 0 or w <= 0:
        raise ValueError("image is empty")
    # a seeded tile reads one extra input row
    seed_extra = 1 if params.forwarding else 0
    if params.tile_size is not None:
        t = params.tile_size
        if t < 1:
            raise ValueError("tile size must be positive")
        if t + 2 * r + seed_extra > MAX_TILE_SIDE:
            raise ValueError(
                f"tile size {t} with radius {r} exceeds the "
                f"{MAX_TILE_SIDE}-pixel input tile cap")
    else:
        t = min(DEFAULT_OUTPUT_TILE, MAX_TILE_SIDE - 2 * r - seed_extra)
    columns = []
    for x0 in range(0, w, t):
        tw = min(t, w - x0)
        col = []
        for y0 in range(0, h, t):
            th = min(t, h - y0)
            seeded = params.forwarding and y0 > 0
            col.append(Tile(out_x0=x0, out_y0=y0, out_w=tw, out_h=th,
                            seeded=seeded, radius=r))
        columns.append(col)
    return TileGrid(out_h=h, out_w=w, tile_size=t,
                    columns=columns, forwarding=params.forwarding)


def pad_image(image: np.ndarray, r: int, mode: str) -> np.ndarray:
    """Pad by the kernel radius; valid mode leaves the image untouched."""
    if mode == "replicate":
        if r == 0:
            return image
        pads = ((r, r), (r, r)) + ((0, 0),) * (image.ndim - 2)
        return np.pad(image, pads, mode="edge")
    if mode == "valid":
        if image.shape[0] < 2 * r + 1 or image.shape[1] < 2 * r + 1:
            raise ValueError("image smaller than the kernel in valid mode")
        return image
    raise ValueError(f"unknown boundary mode {mode!r}")


def _footprint_mask(tile: Tile, kernel, cache: dict) -> np.ndarray | None:
    """Mask of input pixels reachable from some window in the tile."""
    key = (tile.in_h, tile.in_w, tile.out_h + (1 if tile.seeded else 0),
           tile.out_w)
    if key not in cache:
        r = tile.radius
        ch = key[2]  # center rows including the seed row
        mask = np.zeros((tile.in_h, tile.in_w), dtype=bool)
        for i in range(kernel.row_dy.shape[0]):
            dy = int(kernel.row_dy[i])
            xlo = int(kernel.row_xlo[i])
            xhi = int(kernel.row_xhi[i])
            mask[r + dy:r + dy + ch, r + xlo:r + tile.out_w - 1 + xhi] = True
        cache[key] = mask
    return cache[key]


def _target_image(area: int, percentile, out_shape) -> np.ndarray:
    if np.isscalar(percentile) or np.ndim(percentile) == 0:
        t = target_rank(area, float(percentile))
        return np.full(out_shape, t, dtype=np.int64)
    pmap = np.asarray(percentile, dtype=np.float64)
    if pmap.shape != out_shape:
        raise ValueError(
            f"percentile map shape {pmap.shape} does not match the output "
            f"shape {out_shape}")
    if pmap.min() < 0.0 or pmap.max() > 1.0:
        raise ValueError("percentile map values must lie in [0, 1]")
    targets = np.floor(pmap * (area - 1) + 0.5).astype(np.int64)
    return np.clip(targets, 0, area - 1)


def _run_column(column, padded, out, targets, kernel, params, mask_cache):
    r = params.shape.radius
    prev = None
    for tile in column:
        sub = padded[tile.in_y0:tile.in_y0 + tile.in_h,
                     tile.in_x0:tile.in_x0 + tile.in_w]
        vmask = (_footprint_mask(tile, kernel, mask_cache)
                 if params.footprint_mask else None)
        ot = ordinal_transform(sub, vmask)
        cx0 = r
        cy0 = r + (1 if tile.seeded else 0)
        tile_targets = targets[tile.out_y0:tile.out_y0 + tile.out_h,
                               tile.out_x0:tile.out_x0 + tile.out_w]
        forwarded = None
        if tile.seeded:
            if prev is None:
                raise ValueError("seeded tile without a solved tile above it; "
                                 "the one-row overlap is missing")
            seed_targets = targets[tile.out_y0 - 1,
                                   tile.out_x0:tile.out_x0 + tile.out_w]
            # previous tile's local frame -> this tile's local frame
            shift = (prev_in_y0 - tile.in_y0, prev_in_x0 - tile.in_x0)
            forwarded = forward_solutions(prev, ot, kernel, shift, seed_targets)
        values, sol = process_tile(ot, kernel, tile_targets, (cx0, cy0),
                                   forwarded)
        out[tile.out_y0:tile.out_y0 + tile.out_h,
            tile.out_x0:tile.out_x0 + tile.out_w] = values
        if params.forwarding:
            prev = sol
            prev_in_y0 = tile.in_y0
            prev_in_x0 = tile.in_x0


def filter_image(image: np.ndarray, params: FilterParams) -> np.ndarray:
    """Rank-order filter a full image with the fast tiled engine."""
    image = np.asarray(image)
    if image.dtype not in (np.uint8, np.uint16, np.float32):
        raise ValueError(f"unsupported image dtype {image.dtype}; "
                         "use uint8, uint16, or float32")
    if image.ndim == 3:
        return np.stack([filter_image(image[..., c], params)
                         for c in range(image.shape[2])], axis=-1)
    if image.ndim != 2 or image.size == 0:
        raise ValueError("image must be a non-empty 2D or 3D array")
    if image.dtype == np.float32 and np.isnan(image).any():
        raise ValueError("image contains NaN; NaN has no rank under the "
                         "total order used by this filter")

    r = params.shape.radius
    kernel = make_kernel(params.shape)
    grid = decompose(image.shape, params)
    padded = pad_image(image, r, params.boundary)
    targets = _target_image(kernel.area, params.percentile,
                            (grid.out_h, grid.out_w))
    out = np.empty((grid.out_h, grid.out_w), image.dtype)
    mask_cache: dict = {}

    units = grid.columns if params.forwarding else [[t] for t in grid.tiles]
    workers = params.workers or min(len(units), os.cpu_count() or 1)
    if workers <= 1 or len(units) <= 1:
        for unit in units:
            _run_column(unit, padded, out, targets, kernel, params, mask_cache)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_column, unit, padded, out, targets,
                                   kernel, params, mask_cache)
                       for unit in units]
            for f in futures:
                f.result()
    return out
