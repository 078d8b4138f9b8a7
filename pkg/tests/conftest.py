import numpy as np
import pytest


def window_ranks(ot, kernel, center):
    """Ranks of all window pixels, by direct kernel-offset gathering."""
    cx, cy = center
    vals = []
    for dx, dy in zip(kernel.off_dx, kernel.off_dy):
        v = ot.ranks[cy + dy, cx + dx]
        assert v >= 0
        vals.append(int(v))
    return vals


def brute_count(ot, kernel, center, pivot):
    """Brute-force #{window pixels with rank < pivot}."""
    return sum(1 for v in window_ranks(ot, kernel, center) if v < pivot)


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)
