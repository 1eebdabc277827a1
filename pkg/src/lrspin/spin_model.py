"""Spin configurations on finite windows and their energies.

A configuration assigns a color in {0, ..., q-1} to each window site; every
site outside the window carries the fixed exterior color. Two energy forms
are provided: the raw alignment form (pair/boundary/field rewards) and the
normalized disagreement form used by the contour estimates. They agree up to
the normalization scale and a field offset, which tests pin down exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .interactions import (
    CouplingKernel,
    FieldAssignment,
    InteractionSpec,
    exterior_weights,
)
from .lattice import Region, box


@dataclass(frozen=True)
class SpinConfig:
    """Colors on a window plus the constant color of the complement."""

    window: Region
    spins: np.ndarray  # int64, aligned with window.sites
    exterior_color: int

    def __post_init__(self):
        spins = np.asarray(self.spins, dtype=np.int64)
        if spins.shape != (len(self.window),):
            raise ValueError("spins must align with the window sites")
        if np.any(spins < 0):
            raise ValueError("colors are nonnegative")
        if self.exterior_color < 0:
            raise ValueError("exterior color is nonnegative")
        object.__setattr__(self, "spins", spins)

    @staticmethod
    def constant(window: Region, color: int, exterior_color: int | None = None) -> "SpinConfig":
        ext = color if exterior_color is None else exterior_color
        return SpinConfig(window, np.full(len(window), color, dtype=np.int64), ext)

    def spin_at(self, site) -> int:
        site = tuple(site)
        if site in self.window.site_set:
            return int(self.spins[self.window.sites.index(site)])
        return self.exterior_color

    def with_spins(self, spins) -> "SpinConfig":
        return SpinConfig(self.window, np.asarray(spins, dtype=np.int64),
                          self.exterior_color)

    def is_ground(self) -> bool:
        return bool(np.all(self.spins == self.exterior_color))


def config_to_json(config: SpinConfig, q: int) -> str:
    """Serialize a box-window configuration (row-major spin order)."""
    bbox = config.window.bounding_box()
    if bbox is None:
        raise ValueError("cannot serialize an empty window")
    extent = [hi - lo + 1 for lo, hi in bbox]
    if int(np.prod(extent)) != len(config.window):
        raise ValueError("serialization requires a full box window")
    # window.sites is sorted lexicographically, which is row-major for a box
    return json.dumps(
        {
            "d": config.window.dim,
            "q": int(q),
            "corner": [int(lo) for lo, _ in bbox],
            "extent": [int(e) for e in extent],
            "spins": [int(s) for s in config.spins],
            "exterior_color": int(config.exterior_color),
        }
    )


def config_from_json(text: str) -> tuple[SpinConfig, int]:
    d = json.loads(text)
    window = box(tuple(d["extent"]), corner=tuple(d["corner"]))
    cfg = SpinConfig(window, np.array(d["spins"], dtype=np.int64),
                     int(d["exterior_color"]))
    return cfg, int(d["q"])


@dataclass(frozen=True)
class ModelInstance:
    """Kernel + interaction + field + inverse temperature on one window."""

    kernel: CouplingKernel
    interaction: InteractionSpec
    field: FieldAssignment
    beta: float

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.field.window != self.kernel.window:
            raise ValueError("field and kernel must share a window")
        if self.field.q != self.interaction.q:
            raise ValueError("field and interaction must share q")

    @property
    def q(self) -> int:
        return self.interaction.q

    @property
    def window(self) -> Region:
        return self.kernel.window

    @cached_property
    def pair_couplings(self) -> np.ndarray:
        return self.kernel.pair_matrix(self.window)

    @cached_property
    def boundary_weights(self) -> np.ndarray:
        w, _ = exterior_weights(self.window, self.kernel, c_alpha_tol=1e-12)
        return w

    @cached_property
    def phi_table(self) -> np.ndarray:
        """phi_table[a, b] = phi((a - b) mod q)."""
        q = self.q
        idx = (np.arange(q)[:, None] - np.arange(q)[None, :]) % q
        return self.interaction.phi[idx]

    @cached_property
    def psi_table(self) -> np.ndarray:
        q = self.q
        idx = (np.arange(q)[:, None] - np.arange(q)[None, :]) % q
        return self.interaction.psi[idx]

    def _check(self, config: SpinConfig):
        if config.window != self.window:
            raise ValueError("configuration window does not match the model")
        if np.any(config.spins >= self.q) or config.exterior_color >= self.q:
            raise ValueError("colors must lie in range(q)")


def hamiltonian_phi(config: SpinConfig, model: ModelInstance) -> float:
    """Alignment-reward energy.

    -sum_{pairs} J_xy phi(s_x - s_y) - sum_x W(x) phi(s_x - r)
    - sum_x h_{x, s_x}, with W(x) the total coupling of x to the complement
    and r the exterior color.
    """
    model._check(config)
    s = config.spins
    r = config.exterior_color
    phi = model.phi_table
    pair = 0.5 * float(np.sum(model.pair_couplings * phi[s][:, s]))
    bd = float(np.dot(model.boundary_weights, phi[s, r]))
    fld = float(np.sum(model.field.values[np.arange(len(s)), s]))
    return -pair - bd - fld


def hamiltonian_psi(config: SpinConfig, model: ModelInstance) -> float:
    """Disagreement-cost energy, zero on the all-aligned state at zero field.

    sum_{pairs} J_xy psi(s_x - s_y) + sum_x W(x) psi(s_x - r)
    + sum_x (h_{x,0} - h_{x,s_x}) / scale.
    """
    model._check(config)
    s = config.spins
    r = config.exterior_color
    psi = model.psi_table
    pair = 0.5 * float(np.sum(model.pair_couplings * psi[s][:, s]))
    bd = float(np.dot(model.boundary_weights, psi[s, r]))
    vals = model.field.values
    fld = float(np.sum(vals[:, 0] - vals[np.arange(len(s)), s])) / model.interaction.scale
    return pair + bd + fld


def energy_delta(config: SpinConfig, model: ModelInstance, site, new_color: int) -> float:
    """Change in hamiltonian_phi from recoloring one site. O(window) time."""
    model._check(config)
    if not 0 <= new_color < model.q:
        raise ValueError("new color out of range")
    site = tuple(site)
    try:
        i = model.window.sites.index(site)
    except ValueError:
        raise ValueError("site must lie in the window") from None
    s = config.spins
    old = int(s[i])
    if new_color == old:
        return 0.0
    phi = model.phi_table
    row = model.pair_couplings[i]
    pair = float(np.dot(row, phi[new_color, s] - phi[old, s]))
    # row[i] = 0, so the self term drops out
    r = config.exterior_color
    bd = model.boundary_weights[i] * (phi[new_color, r] - phi[old, r])
    fld = model.field.values[i, new_color] - model.field.values[i, old]
    return -pair - float(bd) - float(fld)


def gibbs_weight_log(config: SpinConfig, model: ModelInstance) -> float:
    """log of the unnormalized Gibbs weight, -beta * H."""
    return -model.beta * hamiltonian_phi(config, model)
