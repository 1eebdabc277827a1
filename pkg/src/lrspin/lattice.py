"""Finite-window geometry of Z^d: balls, components, volumes, boundaries.

Sites are integer tuples. A Region is an immutable, deduplicated collection
of sites of a common dimension, stored sorted so that everything derived from
it (component order, contour identifiers, file output) is reproducible.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

NORMS = ("l1", "l2", "linf")


def point_norm(dx, norm: str = "l2") -> float:
    if norm == "l1":
        return float(sum(abs(c) for c in dx))
    if norm == "linf":
        return float(max(abs(c) for c in dx))
    if norm == "l2":
        return math.sqrt(sum(c * c for c in dx))
    raise ValueError(f"unknown norm {norm!r}")


class Region:
    """Finite subset of Z^d with deterministic (sorted) iteration order."""

    __slots__ = ("sites", "site_set", "dim")

    def __init__(self, sites, dim: int | None = None):
        site_set = frozenset(tuple(int(c) for c in s) for s in sites)
        if site_set:
            dims = {len(s) for s in site_set}
            if len(dims) != 1:
                raise ValueError("sites of mixed dimension")
            found = dims.pop()
            if dim is not None and dim != found:
                raise ValueError(f"dim={dim} but sites have dimension {found}")
            dim = found
        elif dim is None:
            raise ValueError("an empty Region needs an explicit dim")
        object.__setattr__(self, "site_set", site_set)
        object.__setattr__(self, "sites", tuple(sorted(site_set)))
        object.__setattr__(self, "dim", int(dim))

    def __setattr__(self, name, value):
        raise AttributeError("Region is immutable")

    def __iter__(self):
        return iter(self.sites)

    def __len__(self):
        return len(self.sites)

    def __contains__(self, site):
        return tuple(site) in self.site_set

    def __eq__(self, other):
        return (
            isinstance(other, Region)
            and self.dim == other.dim
            and self.site_set == other.site_set
        )

    def __hash__(self):
        return hash((self.dim, self.site_set))

    def __repr__(self):
        if len(self.sites) <= 6:
            return f"Region({list(self.sites)})"
        return f"Region(<{len(self.sites)} sites, d={self.dim}>)"

    def union(self, other: "Region") -> "Region":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return Region(self.site_set | other.site_set, dim=self.dim)

    def difference(self, other: "Region") -> "Region":
        return Region(self.site_set - other.site_set, dim=self.dim)

    def intersection(self, other: "Region") -> "Region":
        return Region(self.site_set & other.site_set, dim=self.dim)

    def as_array(self) -> np.ndarray:
        """Sites as an (n, d) int array (empty -> shape (0, d))."""
        if not self.sites:
            return np.zeros((0, self.dim), dtype=np.int64)
        return np.array(self.sites, dtype=np.int64)

    def bounding_box(self):
        """Per-axis (lo, hi) inclusive bounds; None when empty."""
        if not self.sites:
            return None
        arr = self.as_array()
        return tuple((int(lo), int(hi)) for lo, hi in zip(arr.min(0), arr.max(0)))


def box(shape, corner=None) -> Region:
    """Axis-aligned box of the given shape with its lowest corner at `corner`."""
    shape = tuple(int(s) for s in shape)
    if corner is None:
        corner = (0,) * len(shape)
    ranges = [range(c, c + s) for c, s in zip(corner, shape)]
    return Region(itertools.product(*ranges), dim=len(shape))


def unit_steps(dim: int):
    for axis in range(dim):
        for sign in (1, -1):
            step = [0] * dim
            step[axis] = sign
            yield tuple(step)


def site_neighbors(site):
    dim = len(site)
    for step in unit_steps(dim):
        yield tuple(site[i] + step[i] for i in range(dim))


def l1_ball(center, radius: int) -> Region:
    """{y : sum_i |y_i - center_i| <= radius}."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    center = tuple(int(c) for c in center)
    dim = len(center)
    sites = []
    for offset in itertools.product(range(-radius, radius + 1), repeat=dim):
        if sum(abs(c) for c in offset) <= radius:
            sites.append(tuple(center[i] + offset[i] for i in range(dim)))
    return Region(sites, dim=dim)


def connected_components(region: Region) -> list[Region]:
    """Maximal pieces of `region` connected through unit (l1 distance 1) steps.

    Components come back ordered by their lexicographically smallest site.
    """
    remaining = set(region.site_set)
    components = []
    for seed in region.sites:  # sorted, so component order is deterministic
        if seed not in remaining:
            continue
        stack = [seed]
        remaining.discard(seed)
        piece = [seed]
        while stack:
            current = stack.pop()
            for nb in site_neighbors(current):
                if nb in remaining:
                    remaining.discard(nb)
                    stack.append(nb)
                    piece.append(nb)
        components.append(Region(piece, dim=region.dim))
    return components


def volume(region: Region) -> Region:
    """The region plus all its bounded complement components.

    Flood-fills the complement inside the bounding box inflated by one, seeded
    from every frame cell, so the unbounded component is always identified.
    """
    if not region.sites:
        return region
    bounds = region.bounding_box()
    lo = [b[0] - 1 for b in bounds]
    hi = [b[1] + 1 for b in bounds]
    dim = region.dim
    inside = region.site_set

    def in_box(site):
        return all(lo[i] <= site[i] <= hi[i] for i in range(dim))

    frame = []
    for site in itertools.product(*[range(lo[i], hi[i] + 1) for i in range(dim)]):
        if any(site[i] == lo[i] or site[i] == hi[i] for i in range(dim)):
            frame.append(site)
    reached = set()
    stack = [s for s in frame if s not in inside]
    reached.update(stack)
    while stack:
        current = stack.pop()
        for nb in site_neighbors(current):
            if nb in reached or nb in inside or not in_box(nb):
                continue
            reached.add(nb)
            stack.append(nb)
    filled = [
        site
        for site in itertools.product(*[range(lo[i], hi[i] + 1) for i in range(dim)])
        if site in inside or site not in reached
    ]
    return Region(filled, dim=dim)


def interior(region: Region) -> Region:
    """volume(region) minus the region itself (the filled holes)."""
    return volume(region).difference(region)


def boundaries(region: Region):
    """Edge, inner and exterior boundaries of a finite region.

    Returns (edge, inner, exterior) where edge is a tuple of (x, y) pairs with
    x in the region and y a unit neighbor outside it, inner is the sites of
    the region with at least one outside neighbor, and exterior is the outside
    sites adjacent to the region.
    """
    edge = []
    inner = set()
    exterior = set()
    for site in region.sites:
        for nb in site_neighbors(site):
            if nb not in region.site_set:
                edge.append((site, nb))
                inner.add(site)
                exterior.add(nb)
    return tuple(edge), Region(inner, dim=region.dim), Region(exterior, dim=region.dim)


def set_distance(a: Region, b: Region, norm: str = "l2") -> float:
    """min over (x, y) in A x B of |x - y| in the chosen point norm."""
    if not a.sites or not b.sites:
        raise ValueError("set_distance needs nonempty regions")
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    if a.site_set & b.site_set:
        return 0.0
    pa = a.as_array()
    pb = b.as_array()
    # pairwise differences; regions here are small (contour supports)
    diff = pa[:, None, :] - pb[None, :, :]
    if norm == "l1":
        dist = np.abs(diff).sum(axis=2)
    elif norm == "linf":
        dist = np.abs(diff).max(axis=2)
    elif norm == "l2":
        dist = np.sqrt((diff.astype(np.float64) ** 2).sum(axis=2))
    else:
        raise ValueError(f"unknown norm {norm!r}")
    return float(dist.min())
