import numpy as np
import pytest

from isomedian import ShapeSpec, contains, make_kernel, target_rank

RADII = list(range(0, 17)) + [31, 48, 63, 64, 100, 124]


def test_contains_circle_r2():
    spec = ShapeSpec("circle", 2)
    assert not contains(spec, 2, 2)   # 5x5 corners excluded
    assert contains(spec, 0, 0)
    assert contains(spec, 2, 1)       # 4 + 1 = 5 <= 6.25


def test_circle_areas():
    assert make_kernel(ShapeSpec("circle", 2)).area == 21
    k0 = make_kernel(ShapeSpec("circle", 0))
    assert k0.area == 1 and k0.offsets == {(0, 0)}
    assert make_kernel(ShapeSpec("circle", 1)).area == 9  # equals 3x3 square
    assert make_kernel(ShapeSpec("square", 2)).area == 25


def test_area_matches_predicate_and_spans():
    for spec in (ShapeSpec("circle", 5), ShapeSpec("square", 3),
                 ShapeSpec("regular_polygon", 6, sides=5, rotation_deg=10.0)):
        k = make_kernel(spec)
        r = spec.radius
        brute = {(dx, dy) for dy in range(-r, r + 1) for dx in range(-r, r + 1)
                 if contains(spec, dx, dy)}
        assert k.offsets == brute
        assert k.area == len(brute)
        assert k.area == int(np.sum(k.row_xhi - k.row_xlo))


@pytest.mark.parametrize("kind", ["circle", "square"])
def test_point_symmetry(kind):
    k = make_kernel(ShapeSpec(kind, 7))
    offs = k.offsets
    assert offs == {(-dx, -dy) for dx, dy in offs}


def test_circle_dihedral_symmetry():
    for r in (0, 1, 2, 5, 13):
        offs = make_kernel(ShapeSpec("circle", r)).offsets
        for f in [lambda d: (d[1], d[0]), lambda d: (-d[0], d[1]),
                  lambda d: (d[0], -d[1])]:
            assert offs == {f(d) for d in offs}


@pytest.mark.parametrize("r", RADII)
def test_slide_round_trip_circle(r):
    _check_slide_round_trip(make_kernel(ShapeSpec("circle", r)))


@pytest.mark.parametrize("spec", [
    ShapeSpec("square", 4),
    ShapeSpec("regular_polygon", 9, sides=3, rotation_deg=90.0),
    ShapeSpec("regular_polygon", 12, sides=12, rotation_deg=7.5),
])
def test_slide_round_trip_other_shapes(spec):
    _check_slide_round_trip(make_kernel(spec))


def _check_slide_round_trip(k):
    offs = k.offsets
    h_enter, h_exit = k.h_deltas
    # enter/exit deltas are expressed relative to the pre-slide center, so
    # applying them must reproduce the kernel shifted by one pixel
    right = {(dx + 1, dy) for dx, dy in offs}
    slid = (offs - {tuple(e) for e in h_exit}) | {tuple(e) for e in h_enter}
    assert slid == right
    v_enter, v_exit = k.v_deltas
    down = {(dx, dy + 1) for dx, dy in offs}
    slid = (offs - {tuple(e) for e in v_exit}) | {tuple(e) for e in v_enter}
    assert slid == down
    assert len(v_enter) == len(v_exit) == len(k.col_dx)


def test_circle_area_monotone_in_radius():
    areas = [make_kernel(ShapeSpec("circle", r)).area for r in range(0, 40)]
    assert all(a <= b for a, b in zip(areas, areas[1:]))


def test_target_rank():
    assert target_rank(49, 0.5) == 24
    assert target_rank(21, 0.5) == 10
    for n in (1, 2, 21, 49):
        assert target_rank(n, 0.0) == 0
        assert target_rank(n, 1.0) == n - 1
    # cross-check against the rank of the median of a sorted 21-list
    vals = sorted(np.random.default_rng(3).integers(0, 100, 21).tolist())
    assert vals[target_rank(21, 0.5)] == sorted(vals)[10]
    with pytest.raises(ValueError):
        target_rank(21, 1.5)
    with pytest.raises(ValueError):
        target_rank(21, -0.1)


def test_shape_validation():
    with pytest.raises(ValueError):
        ShapeSpec("hexagon", 3)
    with pytest.raises(ValueError):
        ShapeSpec("circle", -1)
    with pytest.raises(ValueError):
        ShapeSpec("regular_polygon", 3, sides=2)
    with pytest.raises(ValueError):
        make_kernel(ShapeSpec("regular_polygon", 3, sides=65))
