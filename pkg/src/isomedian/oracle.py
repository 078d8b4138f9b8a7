"""Brute-force reference filter.

For every output pixel, gather all kernel-member values and sort them; the
output is the element at the target rank.  O(N * r^2 * log r) overall --
intended as ground truth for test images up to about a megapixel, never for
production use.

Ties are immaterial for the output *value* (sorting a multiset yields the
same element at any rank regardless of tie order), so a plain value sort
matches the rank-transform engine bit for bit on integer data.  For float32
the engine orders -0.0 strictly before +0.0, so the gathered windows are
sorted through an order-preserving unsigned-integer view of the bits rather
than by float comparison.
"""

from __future__ import annotations

import numpy as np

from .kernels import ShapeSpec, make_kernel, target_rank

# gather-buffer budget per sort block, in elements
_BLOCK_ELEMS = 16_000_000


def _float_bits_key(arr: np.ndarray) -> np.ndarray:
    u = arr.view(np.uint32)
    return np.where(u >> 31, ~u, u | np.uint32(0x80000000))


def _float_bits_unkey(key: np.ndarray) -> np.ndarray:
    u = np.where(key >> 31, key ^ np.uint32(0x80000000), ~key)
    return u.astype(np.uint32).view(np.float32)


def _sorted_window_rows(padded: np.ndarray, kernel, out_w: int, y0: int, y1: int):
    """Sorted window contents for output rows [y0, y1): (rows, out_w, area)."""
    r = kernel.radius
    gathered = np.empty((y1 - y0, out_w, kernel.area), padded.dtype)
    for i in range(kernel.area):
        dx = int(kernel.off_dx[i]) + r
        dy = int(kernel.off_dy[i]) + r
        gathered[:, :, i] = padded[y0 + dy:y1 + dy, dx:dx + out_w]
    if padded.dtype == np.float32:
        keys = _float_bits_key(gathered)
        keys.sort(axis=-1)
        return _float_bits_unkey(keys)
    gathered.sort(axis=-1)
    return gathered


def reference_filter_ranks(image: np.ndarray, shape: ShapeSpec,
                           percentiles: list[float],
                           boundary: str = "replicate") -> list[np.ndarray]:
    """Brute-force filter at several percentiles with one shared sort."""
    kernel = make_kernel(shape)
    r = shape.radius
    if image.ndim == 3:
        per_chan = [reference_filter_ranks(image[..., c], shape, percentiles,
                                           boundary)
                    for c in range(image.shape[2])]
        return [np.stack([pc[k] for pc in per_chan], axis=-1)
                for k in range(len(percentiles))]
    if image.dtype == np.float32 and np.isnan(image).any():
        raise ValueError("image contains NaN")
    if boundary == "replicate":
        padded = np.pad(image, r, mode="edge")
        out_h, out_w = image.shape
    elif boundary == "valid":
        if image.shape[0] < 2 * r + 1 or image.shape[1] < 2 * r + 1:
            raise ValueError("image smaller than the kernel in valid mode")
        padded = image
        out_h, out_w = image.shape[0] - 2 * r, image.shape[1] - 2 * r
    else:
        raise ValueError(f"unknown boundary mode {boundary!r}")

    ranks = [target_rank(kernel.area, p) for p in percentiles]
    outs = [np.empty((out_h, out_w), image.dtype) for _ in ranks]
    chunk = max(1, _BLOCK_ELEMS // max(1, out_w * kernel.area))
    for y0 in range(0, out_h, chunk):
        y1 = min(y0 + chunk, out_h)
        srt = _sorted_window_rows(padded, kernel, out_w, y0, y1)
        for k, t in enumerate(ranks):
            outs[k][y0:y1] = srt[:, :, t]
    return outs


def reference_filter(image: np.ndarray, params) -> np.ndarray:
    """Brute-force filter with the same parameter object as filter_image."""
    if np.isscalar(params.percentile) or np.ndim(params.percentile) == 0:
        return reference_filter_ranks(image, params.shape,
                                      [float(params.percentile)],
                                      params.boundary)[0]
    # per-pixel percentile: sort every window and pick a per-pixel rank
    if image.ndim == 3:
        return np.stack([reference_filter(image[..., c], params)
                         for c in range(image.shape[2])], axis=-1)
    kernel = make_kernel(params.shape)
    r = params.shape.radius
    if image.dtype == np.float32 and np.isnan(image).any():
        raise ValueError("image contains NaN")
    if params.boundary == "replicate":
        padded = np.pad(image, r, mode="edge")
        out_h, out_w = image.shape
    else:
        padded = image
        out_h, out_w = image.shape[0] - 2 * r, image.shape[1] - 2 * r
    pmap = np.asarray(params.percentile, dtype=np.float64)
    if pmap.shape != (out_h, out_w):
        raise ValueError("percentile map shape must match the output")
    targets = np.floor(pmap * (kernel.area - 1) + 0.5).astype(np.int64)
    targets = np.clip(targets, 0, kernel.area - 1)
    out = np.empty((out_h, out_w), image.dtype)
    cols = np.arange(out_w)
    chunk = max(1, _BLOCK_ELEMS // max(1, out_w * kernel.area))
    for y0 in range(0, out_h, chunk):
        y1 = min(y0 + chunk, out_h)
        srt = _sorted_window_rows(padded, kernel, out_w, y0, y1)
        for y in range(y0, y1):
            out[y] = srt[y - y0, cols, targets[y]]
    return out
