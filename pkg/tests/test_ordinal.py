import numpy as np
import pytest
from hypothesis import given, strategies as st

from isomedian import (ShapeSpec, float_order_key, make_kernel,
                       ordinal_transform, segment_mask, window_membership)


def test_2x2_example():
    ot = ordinal_transform(np.array([[30, 10], [20, 5]], dtype=np.uint8))
    assert ot.ranks.tolist() == [[3, 1], [2, 0]]
    assert ot.values.tolist() == [5, 10, 20, 30]
    assert list(zip(ot.pos_x.tolist(), ot.pos_y.tolist())) == \
        [(1, 1), (1, 0), (0, 1), (0, 0)]


def test_duplicates_get_consecutive_ranks():
    tile = np.array([[22, 29, 41, 74],
                     [16, 29, 55, 81],
                     [4, 63, 90, 77],
                     [99, 12, 33, 47]], dtype=np.uint8)
    ot = ordinal_transform(tile)
    # the two 29s: sorted values {4, 12, 16, 22, 29, 29, ...} -> ranks 4 and 5
    assert ot.ranks[0, 1] == 4 and ot.ranks[1, 1] == 5  # row-major tie order
    assert ot.values[4] == ot.values[5] == 29


def test_constant_tile_row_major_ranks():
    ot = ordinal_transform(np.full((5, 7), 42, dtype=np.uint16))
    assert np.array_equal(ot.ranks, np.arange(35).reshape(5, 7))


def _random_tiles(rng, n):
    for _ in range(n):
        h = int(rng.integers(1, 20))
        w = int(rng.integers(1, 20))
        dt = rng.choice(["uint8", "uint16", "float32"])
        if dt == "float32":
            tile = rng.standard_normal((h, w)).astype(np.float32)
            # plant duplicates
            tile[rng.random((h, w)) < 0.3] = np.float32(0.5)
        else:
            tile = rng.integers(0, 40, (h, w)).astype(dt)
        yield tile


def test_permutation_and_inverse_invariants(rng):
    for tile in _random_tiles(rng, 60):
        ot = ordinal_transform(tile)
        n = tile.size
        assert sorted(ot.ranks.ravel().tolist()) == list(range(n))
        # mutual inverse
        assert np.array_equal(ot.ranks[ot.pos_y, ot.pos_x], np.arange(n))
        # sorted reverse map, consistent with the source values
        assert np.all(ot.values[:-1] <= ot.values[1:])
        assert np.array_equal(ot.values[ot.ranks], tile)
        # stability: matches numpy's stable argsort of (value, scan order)
        expect = np.empty(n, np.int32)
        key = tile.ravel()
        if tile.dtype == np.float32:
            key = float_order_key(key)
        expect[np.argsort(key, kind="stable")] = np.arange(n)
        assert np.array_equal(ot.ranks.ravel(), expect)


def test_monotone_map_keeps_ranks(rng):
    tile = rng.integers(0, 60, (12, 9)).astype(np.uint8)
    lut = np.cumsum(rng.integers(1, 4, 256)).astype(np.uint16)
    assert np.array_equal(ordinal_transform(tile).ranks,
                          ordinal_transform(lut[tile]).ranks)


def test_valid_mask():
    tile = np.array([[9, 1], [4, 7]], dtype=np.uint8)
    mask = np.array([[True, False], [True, True]])
    ot = ordinal_transform(tile, mask)
    assert ot.count == 3
    assert ot.ranks[0, 1] == -1
    assert ot.values.tolist() == [4, 7, 9]


def test_packed_positions():
    ot = ordinal_transform(np.array([[30, 10], [20, 5]], dtype=np.uint8))
    assert ot.packed_positions.dtype == np.uint16
    assert ot.packed_positions.tolist() == [1 | (1 << 8), 1, 1 << 8, 0]


def test_tile_size_limits(rng):
    with pytest.raises(ValueError):
        ordinal_transform(rng.integers(0, 9, (257, 1)).astype(np.uint8))
    with pytest.raises(ValueError):
        ordinal_transform(np.empty((0, 4), dtype=np.uint8))
    with pytest.raises(ValueError):
        ordinal_transform(np.zeros((4, 4), dtype=np.int32))


def test_nan_rejected():
    tile = np.ones((3, 3), np.float32)
    tile[1, 1] = np.nan
    with pytest.raises(ValueError, match="NaN"):
        ordinal_transform(tile)
    with pytest.raises(ValueError, match="NaN"):
        float_order_key(np.float32(np.nan))


def test_float_order_key_special_values():
    ks = [float_order_key(np.float32(v)) for v in (-1.0, -0.0, 0.0, 1.0)]
    assert ks[0] < ks[1] < ks[2] < ks[3]
    x = np.float32(1.5)
    assert float_order_key(x) < float_order_key(np.nextafter(x, np.float32(2.0)))


def test_float_order_key_sorts_like_values(rng):
    vals = (rng.standard_normal(1000) * 10 ** rng.uniform(-6, 6, 1000)
            ).astype(np.float32)
    by_key = vals[np.argsort(float_order_key(vals))]
    assert np.array_equal(np.sort(vals), by_key)


@given(st.floats(width=32, allow_nan=False),
       st.floats(width=32, allow_nan=False))
def test_float_order_key_monotone(a, b):
    a, b = np.float32(a), np.float32(b)
    if a < b:
        assert float_order_key(a) < float_order_key(b)
    elif a == b and not (a == 0.0):
        assert float_order_key(a) == float_order_key(b)


def test_window_membership(rng):
    kernel = make_kernel(ShapeSpec("circle", 2))
    tile = rng.integers(0, 256, (9, 9)).astype(np.uint8)
    ot = ordinal_transform(tile)
    center_rank = int(ot.ranks[4, 4])
    assert window_membership(ot, center_rank, (4, 4), kernel) == 1
    corner_rank = int(ot.ranks[6, 6])  # offset (2, 2): excluded corner
    assert window_membership(ot, corner_rank, (4, 4), kernel) == 0
    total = sum(window_membership(ot, v, (4, 4), kernel)
                for v in range(ot.count))
    assert total == kernel.area


def test_segment_mask_full_and_empty(rng):
    tile = rng.integers(0, 9, (10, 10)).astype(np.uint8)
    ot = ordinal_transform(tile)
    big = make_kernel(ShapeSpec("square", 9))  # covers the whole tile
    mask, pop = segment_mask(ot, 0, (4, 4), big)
    assert mask == (1 << 64) - 1 and pop == 64
    far = make_kernel(ShapeSpec("circle", 2))
    mask, pop = segment_mask(ot, 0, (200, 200), far)
    assert mask == 0 and pop == 0


def test_segment_mask_against_loop_oracle(rng):
    kernel = make_kernel(ShapeSpec("circle", 5))
    tile = rng.integers(0, 256, (64, 64)).astype(np.uint8)
    ot = ordinal_transform(tile)
    for seg in (0, 7, 31, 63):
        for center in [(10, 10), (5, 40), (63, 0)]:
            mask, pop = segment_mask(ot, seg, center, kernel)
            expect_pop = 0
            for k in range(64):
                v = 64 * seg + k
                member = window_membership(ot, v, center, kernel)
                assert ((mask >> k) & 1) == member
                expect_pop += member
            assert pop == expect_pop
    # indices past count-1 contribute zero bits
    small = ordinal_transform(rng.integers(0, 9, (7, 10)).astype(np.uint8))
    big = make_kernel(ShapeSpec("square", 10))
    mask, pop = segment_mask(small, 1, (3, 3), big)
    assert pop == 70 - 64 and mask == (1 << 6) - 1
