"""Contours of a spin configuration.

A site is correct when the configuration is constant on its closed unit
l1-ball (the extended configuration: exterior sites carry the exterior
color). The incorrect points are grouped into clusters whose pairwise
distance exceeds M * min(size)^a; each cluster, together with the colors on
it and the labels of the holes it encloses, is a contour. Erasing a contour
recolors its support to the surrounding color and rotates each hole so its
label matches, which removes exactly that contour.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .interactions import CouplingKernel, exterior_weights
from .lattice import (
    Region,
    boundaries,
    connected_components,
    interior,
    site_neighbors,
    volume,
)
from .spin_model import SpinConfig


class ContourError(ValueError):
    """Raised when a cluster has no consistent label structure.

    This happens when the separation parameters are too weak to keep a
    genuine contour in one cluster, so a piece of it ends up with conflicting
    colors on a boundary read.
    """


@dataclass(frozen=True)
class MaParams:
    """Cluster separation parameters: merge clusters closer than M * n^a."""

    M: float
    a: float

    def __post_init__(self):
        if self.M < 1 or self.a <= 0:
            raise ValueError("need M >= 1 and a > 0")


@dataclass(frozen=True)
class Contour:
    support: Region
    spins_on_support: tuple
    exterior_label: int
    interiors: tuple  # Regions, one per enclosed component
    interior_labels: tuple

    @property
    def size(self) -> int:
        return len(self.support)

    def interiors_by_label(self) -> dict:
        """Union of enclosed components for each occurring label."""
        out: dict[int, Region] = {}
        for comp, lab in zip(self.interiors, self.interior_labels):
            out[lab] = out.get(lab, Region([], dim=comp.dim)).union(comp)
        return out

    def whole_interior(self) -> Region:
        whole = Region([], dim=self.support.dim)
        for comp in self.interiors:
            whole = whole.union(comp)
        return whole


@dataclass(frozen=True)
class ContourFamily:
    contours: tuple
    window: Region
    exterior_color: int
    params: MaParams


def incorrect_points(config: SpinConfig) -> Region:
    """Sites whose closed unit ball is not monochromatic.

    Checks the extended configuration, so the result can include sites just
    outside the window.
    """
    win = config.window
    colors = dict(zip(win.sites, (int(s) for s in config.spins)))
    r = config.exterior_color

    def color_at(site):
        return colors.get(site, r)

    candidates = set(win.sites)
    for site in win.sites:
        candidates.update(site_neighbors(site))
    bad = []
    for site in sorted(candidates):
        c = color_at(site)
        if any(color_at(nb) != c for nb in site_neighbors(site)):
            bad.append(site)
    return Region(bad, dim=win.dim)


def _cluster_distance(a: np.ndarray, b: np.ndarray, norm: str) -> float:
    diff = a[:, None, :] - b[None, :, :]
    if norm == "l1":
        d = np.abs(diff).sum(axis=2)
    elif norm == "linf":
        d = np.abs(diff).max(axis=2)
    else:
        d = np.sqrt((diff**2).sum(axis=2))
    return float(d.min())


def ma_partition(points: Region, params: MaParams, norm: str = "l2",
                 order_seed: int | None = None) -> list[Region]:
    """Merge closure of the separation relation.

    Starting from singletons, any two clusters at distance at most
    M * min(size)^a are merged, until no such pair remains. Merging only
    enlarges sizes and shrinks distances, so the fixed point does not depend
    on the merge order; order_seed shuffles the scan order to let tests
    confirm that.
    """
    n = len(points)
    if n == 0:
        return []
    coords = points.as_array().astype(np.float64)
    clusters: list[list[int]] = [[i] for i in range(n)]
    rng = np.random.default_rng(order_seed) if order_seed is not None else None
    merged = True
    while merged:
        merged = False
        pairs = [(i, j) for i in range(len(clusters)) for j in range(i + 1, len(clusters))]
        if rng is not None:
            rng.shuffle(pairs)
        for i, j in pairs:
            ci, cj = clusters[i], clusters[j]
            thr = params.M * min(len(ci), len(cj)) ** params.a
            if _cluster_distance(coords[ci], coords[cj], norm) <= thr:
                clusters[i] = ci + cj
                del clusters[j]
                merged = True
                break
    out = [Region([points.sites[i] for i in cl], dim=points.dim) for cl in clusters]
    out.sort(key=lambda reg: reg.sites[0])
    return out


def _read_common_color(sites, color_at, what: str) -> int:
    reads = {color_at(s) for s in sites}
    if not reads:
        raise ContourError(f"empty {what} read; cluster structure is broken")
    if len(reads) != 1:
        raise ContourError(
            f"inconsistent {what} read {sorted(reads)}; "
            "separation parameters are too weak for this configuration"
        )
    return reads.pop()


def extract_contours(config: SpinConfig, params: MaParams,
                     norm: str = "l2") -> ContourFamily:
    """Cluster the incorrect points and attach labels to every cluster."""
    win = config.window
    colors = dict(zip(win.sites, (int(s) for s in config.spins)))
    r = config.exterior_color

    def color_at(site):
        return colors.get(site, r)

    bad = incorrect_points(config)
    contours = []
    for sp in ma_partition(bad, params, norm=norm):
        filled = volume(sp)
        holes = interior(sp)
        comps = connected_components(holes)
        labels = []
        for comp in comps:
            _, _, ext = boundaries(comp)
            if not ext.site_set <= filled.site_set:
                raise ContourError("enclosed component leaks out of the cluster volume")
            labels.append(_read_common_color(ext.sites, color_at, "interior boundary"))
        _, _, outside = boundaries(filled)
        ext_label = _read_common_color(outside.sites, color_at, "exterior boundary")
        contours.append(
            Contour(
                support=sp,
                spins_on_support=tuple(color_at(s) for s in sp.sites),
                exterior_label=ext_label,
                interiors=tuple(comps),
                interior_labels=tuple(labels),
            )
        )
    return ContourFamily(contours=tuple(contours), window=win,
                         exterior_color=r, params=params)


def external_contours(family: ContourFamily) -> list[Contour]:
    """Contours not enclosed by any other contour of the family."""
    out = []
    for i, g in enumerate(family.contours):
        enclosed = False
        for j, other in enumerate(family.contours):
            if i == j:
                continue
            if g.support.site_set <= other.whole_interior().site_set:
                enclosed = True
                break
        if not enclosed:
            out.append(g)
    return out


def erase(config: SpinConfig, contour: Contour, q: int) -> SpinConfig:
    """Remove one contour.

    The support is recolored to the contour's surrounding color; each
    enclosed component is rotated by the color shift that carries its label
    to that color. Other contours survive up to a color rotation; a lone
    contour erases to the all-aligned state.
    """
    e = contour.exterior_label
    spins = config.spins.copy()
    index = {site: i for i, site in enumerate(config.window.sites)}
    for site in contour.support.sites:
        if site in index:
            spins[index[site]] = e
    for comp, lab in zip(contour.interiors, contour.interior_labels):
        shift = (lab - e) % q
        for site in comp.sites:
            if site in index:
                spins[index[site]] = (spins[index[site]] - shift) % q
    return SpinConfig(config.window, spins, config.exterior_color)


def surface_coupling(region: Region, kernel: CouplingKernel,
                     c_alpha_tol: float = 1e-10) -> float:
    """Total coupling between a region and its complement."""
    w, _ = exterior_weights(region, kernel, c_alpha_tol=c_alpha_tol)
    return float(w.sum())


def family_to_json(family: ContourFamily) -> str:
    payload = {
        "exterior_color": family.exterior_color,
        "M": family.params.M,
        "a": family.params.a,
        "contours": [
            {
                "support": [list(s) for s in g.support.sites],
                "spins": list(g.spins_on_support),
                "exterior_label": g.exterior_label,
                "interiors": [[list(s) for s in comp.sites] for comp in g.interiors],
                "interior_labels": list(g.interior_labels),
            }
            for g in family.contours
        ],
    }
    return json.dumps(payload, indent=2)
