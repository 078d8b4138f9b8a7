"""Convex filter kernels rasterized to pixel offset sets.

A kernel is described by a :class:`ShapeSpec` (circle, square, or regular
polygon with a nominal integer radius) and rasterized by :func:`make_kernel`
into the offset spans and slide deltas the sliding-window filter consumes.

Circle membership uses an effective radius of ``r + 0.5``: an offset
``(dx, dy)`` belongs to the kernel iff ``dx**2 + dy**2 <= (r + 0.5)**2``,
evaluated in exact integer arithmetic as ``4*(dx*dx + dy*dy) <= (2r+1)**2``.
This yields the familiar 21-tap kernel at ``r = 2`` (a 5x5 square minus its
corners) and avoids degenerate plus-shaped kernels at small radii.  Polygon
vertices sit on the circumcircle of radius ``r + 0.5``, with boundary points
counted as inside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MAX_POLYGON_SIDES = 64
MAX_RADIUS = 124  # 8 + 2*124 <= 256, the tile-side cap


@dataclass(frozen=True)
class ShapeSpec:
    """Kernel shape: kind, nominal radius, and polygon parameters."""

    kind: str
    radius: int
    sides: int = 0
    rotation_deg: float = 0.0

    def __post_init__(self):
        if self.kind not in ("circle", "square", "regular_polygon"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.radius < 0:
            raise ValueError("kernel radius must be >= 0")
        if self.kind == "regular_polygon" and self.sides < 3:
            raise ValueError("regular_polygon needs at least 3 sides")


def _polygon_planes(spec: ShapeSpec) -> np.ndarray:
    """Half-plane coefficients (a, b, c): inside iff a*dx + b*dy <= c."""
    k = spec.sides
    rc = spec.radius + 0.5
    ang = np.radians(spec.rotation_deg) + 2.0 * np.pi * np.arange(k + 1) / k
    vx = rc * np.cos(ang)
    vy = rc * np.sin(ang)
    planes = np.empty((k, 3), dtype=np.float64)
    for i in range(k):
        ex = vx[i + 1] - vx[i]
        ey = vy[i + 1] - vy[i]
        # normal pointing away from the origin
        nx, ny = ey, -ex
        c = nx * vx[i] + ny * vy[i]
        if c < 0.0:
            nx, ny, c = -nx, -ny, -c
        planes[i, 0] = nx
        planes[i, 1] = ny
        planes[i, 2] = c
    return planes


def contains(spec: ShapeSpec, dx: int, dy: int) -> bool:
    """Kernel membership test for an offset from the window center."""
    r = spec.radius
    if spec.kind == "circle":
        return 4 * (dx * dx + dy * dy) <= (2 * r + 1) ** 2
    if spec.kind == "square":
        return -r <= dx <= r and -r <= dy <= r
    planes = _polygon_planes(spec)
    for i in range(planes.shape[0]):
        if planes[i, 0] * dx + planes[i, 1] * dy > planes[i, 2]:
            return False
    return True


@dataclass(frozen=True)
class KernelShape:
    """Rasterized kernel: offsets, per-row spans, and slide deltas.

    Spans are half-open column intervals per row offset; slide deltas give,
    relative to the *pre-slide* center, the offsets entering and exiting the
    window when the center moves one pixel right or down.
    """

    spec: ShapeSpec
    area: int
    off_dx: np.ndarray  # (area,) int32, row-major offset order
    off_dy: np.ndarray
    row_dy: np.ndarray  # occupied rows; span [row_xlo, row_xhi)
    row_xlo: np.ndarray
    row_xhi: np.ndarray
    col_dx: np.ndarray  # occupied columns; extents [col_ytop, col_ybot]
    col_ytop: np.ndarray
    col_ybot: np.ndarray
    shape_code: int  # 0 circle, 1 square, 2 polygon
    lim: int  # (2r+1)**2, circle membership bound
    planes: np.ndarray = field(default_factory=lambda: np.empty((0, 3)))

    @property
    def radius(self) -> int:
        return self.spec.radius

    @property
    def offsets(self) -> set[tuple[int, int]]:
        return set(zip(self.off_dx.tolist(), self.off_dy.tolist()))

    @property
    def h_deltas(self) -> tuple[np.ndarray, np.ndarray]:
        """(entering, exiting) offsets for a one-pixel rightward slide."""
        enter = np.stack([self.row_xhi, self.row_dy], axis=1)
        exit_ = np.stack([self.row_xlo, self.row_dy], axis=1)
        return enter, exit_

    @property
    def v_deltas(self) -> tuple[np.ndarray, np.ndarray]:
        """(entering, exiting) offsets for a one-pixel downward slide."""
        enter = np.stack([self.col_dx, self.col_ybot + 1], axis=1)
        exit_ = np.stack([self.col_dx, self.col_ytop], axis=1)
        return enter, exit_


def make_kernel(spec: ShapeSpec) -> KernelShape:
    """Rasterize a shape spec into a KernelShape."""
    if spec.kind == "regular_polygon" and spec.sides > MAX_POLYGON_SIDES:
        raise ValueError(
            f"regular_polygon is limited to {MAX_POLYGON_SIDES} sides; "
            "12 sides is already visually indistinguishable from a circle"
        )
    r = spec.radius
    shape_code = {"circle": 0, "square": 1, "regular_polygon": 2}[spec.kind]
    planes = (
        _polygon_planes(spec) if spec.kind == "regular_polygon"
        else np.empty((0, 3), dtype=np.float64)
    )

    off_dx, off_dy = [], []
    row_dy, row_xlo, row_xhi = [], [], []
    for dy in range(-r, r + 1):
        xs = [dx for dx in range(-r, r + 1) if contains(spec, dx, dy)]
        if not xs:
            continue
        if xs != list(range(xs[0], xs[-1] + 1)):
            raise AssertionError("non-contiguous kernel row; shape is not convex")
        row_dy.append(dy)
        row_xlo.append(xs[0])
        row_xhi.append(xs[-1] + 1)
        for dx in xs:
            off_dx.append(dx)
            off_dy.append(dy)

    col_dx, col_ytop, col_ybot = [], [], []
    for dx in range(-r, r + 1):
        ys = [dy for dy in range(-r, r + 1) if contains(spec, dx, dy)]
        if not ys:
            continue
        if ys != list(range(ys[0], ys[-1] + 1)):
            raise AssertionError("non-contiguous kernel column; shape is not convex")
        col_dx.append(dx)
        col_ytop.append(ys[0])
        col_ybot.append(ys[-1])

    i32 = lambda a: np.asarray(a, dtype=np.int32)
    return KernelShape(
        spec=spec,
        area=len(off_dx),
        off_dx=i32(off_dx),
        off_dy=i32(off_dy),
        row_dy=i32(row_dy),
        row_xlo=i32(row_xlo),
        row_xhi=i32(row_xhi),
        col_dx=i32(col_dx),
        col_ytop=i32(col_ytop),
        col_ybot=i32(col_ybot),
        shape_code=shape_code,
        lim=(2 * r + 1) ** 2,
        planes=planes,
    )


def target_rank(area: int, percentile: float) -> int:
    """0-indexed selection rank for a percentile in [0, 1]."""
    if not 0.0 <= percentile <= 1.0:
        raise ValueError(f"percentile must be in [0, 1], got {percentile}")
    if area < 1:
        raise ValueError("kernel area must be >= 1")
    rank = math.floor(percentile * (area - 1) + 0.5)
    return min(max(rank, 0), area - 1)
