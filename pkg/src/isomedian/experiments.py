"""Quality and performance experiments.

Two protocols exposed through the CLI:

* rotational invariance: filter the image rotated +a and -a degrees, rotate
  the results back, and compare.  An isotropic kernel gives nearly identical
  results at both angles; a square kernel does not.  The standard deviation
  of the two-angle difference, circle versus equal-area square, quantifies
  the anisotropy.
* benchmark: wall-time the fast and brute-force engines over a radius sweep.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .kernels import ShapeSpec, make_kernel
from .oracle import reference_filter
from .tiling import FilterParams, filter_image


def equal_area_square_radius(circle_radius: int) -> int:
    """Square radius whose (2q+1)^2 area is closest to the circle's area."""
    area = make_kernel(ShapeSpec("circle", circle_radius)).area
    q = round((math.sqrt(area) - 1.0) / 2.0)
    return max(0, q)


@dataclass(frozen=True)
class RotationResult:
    kernel: str
    std_dev: float
    difference: np.ndarray  # two-angle difference over the cropped interior


def rotation_invariance(image: np.ndarray, radius: int,
                        angle_deg: float = 22.5, percentile: float = 0.5,
                        interpolation_order: int = 1,
                        ) -> tuple[RotationResult, RotationResult, float]:
    """Run the rotate/filter/unrotate comparison for circle vs square.

    Returns (circle, square, square_over_circle_ratio).  Interpolation is
    bilinear by default (order=1); pass order=3 for bicubic.
    """
    if image.ndim != 2:
        raise ValueError("rotational-invariance comparison needs a grayscale image")
    img = image.astype(np.float32)
    h, w = img.shape
    theta = math.radians(abs(angle_deg))
    # interior untouched by rotation boundary effects, plus the filter reach
    margin = math.ceil(max(h, w) / 2.0 * (math.sin(theta) + math.cos(theta) - 1.0))
    margin += radius + 2
    if h - 2 * margin < 8 or w - 2 * margin < 8:
        raise ValueError(f"image too small to crop a {margin}-pixel margin "
                         "after back-rotation")
    shapes = [("circle", ShapeSpec("circle", radius)),
              ("square", ShapeSpec("square", equal_area_square_radius(radius)))]
    results = []
    for name, spec in shapes:
        backs = []
        for sign in (1.0, -1.0):
            rot = ndimage.rotate(img, sign * angle_deg, reshape=False,
                                 order=interpolation_order, mode="nearest")
            filt = filter_image(rot.astype(np.float32),
                                FilterParams(shape=spec, percentile=percentile))
            back = ndimage.rotate(filt, -sign * angle_deg, reshape=False,
                                  order=interpolation_order, mode="nearest")
            backs.append(back)
        diff = (backs[0] - backs[1])[margin:h - margin, margin:w - margin]
        results.append(RotationResult(kernel=name,
                                      std_dev=float(np.std(diff)),
                                      difference=diff))
    circle, square = results
    ratio = square.std_dev / circle.std_dev if circle.std_dev > 0 else math.inf
    return circle, square, ratio


@dataclass(frozen=True)
class BenchRecord:
    radius: int
    engine: str
    dtype: str
    megapixels: float
    ms: float
    mps: float  # megapixels per second


BENCH_CSV_HEADER = "radius,engine,dtype,mp,ms,mps"


def bench_record_csv(rec: BenchRecord) -> str:
    return (f"{rec.radius},{rec.engine},{rec.dtype},{rec.megapixels:.3f},"
            f"{rec.ms:.2f},{rec.mps:.3f}")


def run_benchmark(image: np.ndarray, radii: list[int], engine: str = "fast",
                  percentile: float = 0.5, repeats: int = 3,
                  warmup: bool = True, workers: int | None = None,
                  ) -> list[BenchRecord]:
    """Best-of-N wall times of one engine over a radius sweep."""
    if engine not in ("fast", "oracle"):
        raise ValueError(f"unknown engine {engine!r}")
    mp = image.shape[0] * image.shape[1] / 1e6
    records = []
    for radius in radii:
        params = FilterParams(shape=ShapeSpec("circle", radius),
                              percentile=percentile, workers=workers)
        run = (lambda: filter_image(image, params)) if engine == "fast" \
            else (lambda: reference_filter(image, params))
        if warmup:
            run()
        best = math.inf
        for _ in range(max(1, repeats)):
            t0 = time.perf_counter()
            run()
            best = min(best, time.perf_counter() - t0)
        records.append(BenchRecord(radius=radius, engine=engine,
                                   dtype=str(image.dtype), megapixels=mp,
                                   ms=best * 1e3, mps=mp / best))
    return records
