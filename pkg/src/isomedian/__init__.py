"""Exact median and percentile filtering with circular and convex kernels.

The fast engine rank-transforms each image tile, then solves every output
pixel by sliding pivot/count window cursors over the immutable rank data;
the oracle engine brute-forces every window by sorting.  Both produce
bit-identical output.
"""

from .kernels import KernelShape, ShapeSpec, contains, make_kernel, target_rank
from .ordinal import (OrdinalTile, float_order_key, ordinal_transform,
                      segment_mask, window_membership)
from .core import (RowSolution, ScanDefectError, WindowState, bracket_filter,
                   forward_solutions, process_tile, refine, select_pivot,
                   slide_horizontal, slide_vertical_row, solve_seed)
from .tiling import FilterParams, TileGrid, decompose, filter_image, pad_image
from .oracle import reference_filter, reference_filter_ranks
from .netpbm import read_image, write_image
from .experiments import (BenchRecord, RotationResult, equal_area_square_radius,
                          rotation_invariance, run_benchmark)

__all__ = [
    "KernelShape", "ShapeSpec", "contains", "make_kernel", "target_rank",
    "OrdinalTile", "float_order_key", "ordinal_transform", "segment_mask",
    "window_membership",
    "RowSolution", "ScanDefectError", "WindowState", "bracket_filter",
    "forward_solutions", "process_tile", "refine", "select_pivot",
    "slide_horizontal", "slide_vertical_row", "solve_seed",
    "FilterParams", "TileGrid", "decompose", "filter_image", "pad_image",
    "reference_filter", "reference_filter_ranks",
    "read_image", "write_image",
    "BenchRecord", "RotationResult", "equal_area_square_radius",
    "rotation_invariance", "run_benchmark",
]

__version__ = "0.1.0"
