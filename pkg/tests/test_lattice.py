import itertools

import numpy as np
import pytest

from lrspin.lattice import (
    Region,
    boundaries,
    box,
    connected_components,
    interior,
    l1_ball,
    set_distance,
    volume,
)


def fill_oracle(sites, dim):
    """Independent flood-fill: sites plus bounded holes, brute force on a
    padded grid."""
    sites = set(sites)
    if not sites:
        return set()
    arr = np.array(sorted(sites))
    lo = arr.min(0) - 1
    hi = arr.max(0) + 1
    all_cells = set(itertools.product(*[range(lo[i], hi[i] + 1) for i in range(dim)]))
    outside = set()
    frame = {c for c in all_cells if any(c[i] in (lo[i], hi[i]) for i in range(dim))}
    stack = [c for c in frame if c not in sites]
    outside.update(stack)
    while stack:
        cur = stack.pop()
        for axis in range(dim):
            for sign in (1, -1):
                nb = list(cur)
                nb[axis] += sign
                nb = tuple(nb)
                if nb in all_cells and nb not in sites and nb not in outside:
                    outside.add(nb)
                    stack.append(nb)
    return {c for c in all_cells if c in sites or c not in outside}


def ring(inner, outer):
    """Square ring of sites x with inner <= max(|x1|,|x2|) <= outer."""
    pts = []
    for x in range(-outer, outer + 1):
        for y in range(-outer, outer + 1):
            if inner <= max(abs(x), abs(y)) <= outer:
                pts.append((x, y))
    return pts


def test_l1_ball_zero_radius():
    assert l1_ball((0, 0), 0) == Region([(0, 0)])


def test_l1_ball_unit_d2():
    ball = l1_ball((0, 0), 1)
    assert set(ball) == {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}


def test_l1_ball_translation():
    shifted = l1_ball((1, 1), 1)
    base = l1_ball((0, 0), 1)
    assert set(shifted) == {(x + 1, y + 1) for x, y in base}


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_l1_ball_unit_count(dim):
    center = (0,) * dim
    assert len(l1_ball(center, 1)) == 2 * dim + 1


def test_connected_components_adjacent():
    assert len(connected_components(Region([(0, 0), (1, 0)]))) == 1


def test_connected_components_split():
    comps = connected_components(Region([(0, 0), (2, 0)]))
    assert len(comps) == 2
    assert comps[0] == Region([(0, 0)])


def test_connected_components_empty():
    assert connected_components(Region([], dim=2)) == []


def test_connected_components_diagonal_not_adjacent():
    # diagonal neighbors are distance 2 in l1
    comps = connected_components(Region([(0, 0), (1, 1)]))
    assert len(comps) == 2


def test_volume_fills_perimeter():
    perimeter = Region(ring(1, 1))
    assert len(perimeter) == 8
    assert volume(perimeter) == Region(ring(0, 1))


def test_volume_solid_square():
    solid = box((2, 2))
    assert volume(solid) == solid


def test_volume_single_site():
    assert volume(Region([(0, 0)])) == Region([(0, 0)])


def test_interior_perimeter():
    assert interior(Region(ring(1, 1))) == Region([(0, 0)])


def test_interior_solid():
    assert len(interior(box((3, 2)))) == 0


def test_interior_nested_rings_vs_oracle():
    nested = Region(ring(1, 1) + ring(3, 3))
    expected = fill_oracle(set(nested.site_set), 2) - set(nested.site_set)
    assert set(interior(nested).site_set) == expected
    # both the center hole and the gap ring at radius 2 are enclosed
    assert (0, 0) in interior(nested)
    assert (2, 0) in interior(nested)


def test_volume_matches_oracle_random():
    rng = np.random.default_rng(11)
    for _ in range(60):
        n = rng.integers(1, 25)
        pts = {tuple(p) for p in rng.integers(-4, 5, size=(n, 2))}
        region = Region(pts)
        assert set(volume(region).site_set) == fill_oracle(pts, 2)


def test_volume_d1():
    # in d=1 a gap between occupied cells is a hole
    region = Region([(0,), (2,)])
    assert volume(region) == Region([(0,), (1,), (2,)])


def test_boundaries_single_site():
    edge, inner, exterior = boundaries(Region([(0, 0)]))
    assert len(edge) == 4
    assert inner == Region([(0, 0)])
    assert len(exterior) == 4


def test_boundaries_2x2():
    edge, inner, exterior = boundaries(box((2, 2)))
    assert len(edge) == 8
    assert inner == box((2, 2))
    assert len(exterior) == 8


def test_boundaries_empty():
    edge, inner, exterior = boundaries(Region([], dim=2))
    assert edge == ()
    assert len(inner) == 0 and len(exterior) == 0


def test_boundary_size_inequalities():
    rng = np.random.default_rng(5)
    for _ in range(40):
        n = rng.integers(1, 20)
        pts = {tuple(p) for p in rng.integers(-3, 4, size=(n, 2))}
        region = Region(pts)
        edge, inner, exterior = boundaries(region)
        assert len(inner) <= len(edge)
        assert len(exterior) <= len(edge)


def test_volume_idempotent_and_contains():
    rng = np.random.default_rng(7)
    for _ in range(30):
        n = rng.integers(1, 18)
        pts = {tuple(p) for p in rng.integers(-3, 4, size=(n, 2))}
        region = Region(pts)
        filled = volume(region)
        assert region.site_set <= filled.site_set
        assert volume(filled) == filled


def test_interior_partition():
    rng = np.random.default_rng(13)
    for _ in range(30):
        n = rng.integers(1, 18)
        pts = {tuple(p) for p in rng.integers(-3, 4, size=(n, 2))}
        region = Region(pts)
        inner = interior(region)
        assert not (inner.site_set & region.site_set)
        assert inner.site_set | region.site_set == volume(region).site_set


def test_set_distance_basic():
    assert set_distance(Region([(0, 0)]), Region([(3, 0)])) == 3.0
    assert set_distance(Region([(0, 0)]), Region([(3, 4)])) == 5.0


def test_set_distance_overlap_and_symmetry():
    a = Region([(0, 0), (1, 0)])
    b = Region([(1, 0), (5, 5)])
    assert set_distance(a, b) == 0.0
    c = Region([(4, 1)])
    assert set_distance(a, c) == set_distance(c, a)


def test_set_distance_norms():
    a = Region([(0, 0)])
    b = Region([(2, 3)])
    assert set_distance(a, b, norm="l1") == 5.0
    assert set_distance(a, b, norm="linf") == 3.0
    assert abs(set_distance(a, b, norm="l2") - np.hypot(2, 3)) < 1e-12


def test_set_distance_zero_iff_intersect():
    rng = np.random.default_rng(3)
    for _ in range(50):
        a = {tuple(p) for p in rng.integers(0, 5, size=(rng.integers(1, 6), 2))}
        b = {tuple(p) for p in rng.integers(0, 5, size=(rng.integers(1, 6), 2))}
        dist = set_distance(Region(a), Region(b))
        assert (dist == 0.0) == bool(a & b)


def test_set_distance_empty_rejected():
    with pytest.raises(ValueError):
        set_distance(Region([], dim=2), Region([(0, 0)]))


def test_region_deduplicates_and_sorts():
    region = Region([(1, 0), (0, 0), (1, 0)])
    assert region.sites == ((0, 0), (1, 0))
    assert len(region) == 2


def test_region_dimension_mismatch():
    with pytest.raises(ValueError):
        Region([(0, 0), (0, 0, 0)])
