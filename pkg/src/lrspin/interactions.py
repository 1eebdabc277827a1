"""Interaction functions on Z_q, coupling kernels, lattice coupling sums and
external-field constructors.

Colors live in {0, ..., q-1} with 0 the reference color; all color arithmetic
is mod q.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from .lattice import Region, point_norm, site_neighbors

# ---------------------------------------------------------------------------
# interaction functions phi / psi
# ---------------------------------------------------------------------------


def normalize(phi) -> tuple[np.ndarray, float]:
    """Normalized disagreement cost psi and its minimal nonzero value m.

    psi(n) = (phi(0) - phi(n)) / (phi(0) - min_{n != 0} phi(n)), so psi(0) = 0,
    max psi = 1 and m = min_{n != 0} psi(n) > 0. Rejects phi without a strict
    maximum at 0 (the aligned state must be the unique energetic optimum).
    """
    phi = np.asarray(phi, dtype=np.float64)
    if phi.ndim != 1 or len(phi) < 2:
        raise ValueError("phi must be a vector of length q >= 2")
    rest = phi[1:]
    if not np.all(phi[0] > rest):
        raise ValueError("phi(0) must strictly dominate phi(n) for n != 0")
    scale = phi[0] - rest.min()
    psi = (phi[0] - phi) / scale
    m = float(psi[1:].min())
    return psi, m


@dataclass(frozen=True)
class InteractionSpec:
    """phi on Z_q together with its normalization psi and minimal cost m."""

    q: int
    phi: np.ndarray
    psi: np.ndarray
    m: float
    name: str = "custom"

    @property
    def scale(self) -> float:
        """phi(0) - min_{n != 0} phi(n): the phi->psi energy unit."""
        return float(self.phi[0] - self.phi[1:].min())

    @staticmethod
    def from_phi(phi, name: str = "custom") -> "InteractionSpec":
        phi = np.asarray(phi, dtype=np.float64)
        psi, m = normalize(phi)
        return InteractionSpec(q=len(phi), phi=phi, psi=psi, m=m, name=name)

    @staticmethod
    def potts(q: int) -> "InteractionSpec":
        phi = np.zeros(q)
        phi[0] = 1.0
        return InteractionSpec.from_phi(phi, name="potts")

    @staticmethod
    def clock(q: int) -> "InteractionSpec":
        phi = np.cos(2.0 * np.pi * np.arange(q) / q)
        return InteractionSpec.from_phi(phi, name="clock")

    def to_dict(self) -> dict:
        return {"q": self.q, "name": self.name, "phi": [float(v) for v in self.phi]}

    @staticmethod
    def from_dict(d: dict) -> "InteractionSpec":
        name = d.get("name", "custom")
        if name == "potts":
            return InteractionSpec.potts(int(d["q"]))
        if name == "clock":
            return InteractionSpec.clock(int(d["q"]))
        return InteractionSpec.from_phi(d["phi"], name=name)


# ---------------------------------------------------------------------------
# Fourier analysis on Z_q
# ---------------------------------------------------------------------------


def dft_zq(f) -> np.ndarray:
    """f_hat(k) = sum_n f(n) * conj(exp(i 2 pi k n / q)). Direct O(q^2)."""
    f = np.asarray(f, dtype=np.complex128)
    q = len(f)
    n = np.arange(q)
    out = np.empty(q, dtype=np.complex128)
    for k in range(q):
        out[k] = np.sum(f * np.exp(-2j * np.pi * k * n / q))
    return out


def idft_zq(fhat) -> np.ndarray:
    """Inverse of dft_zq: f(n) = (1/q) sum_k fhat(k) exp(i 2 pi k n / q)."""
    fhat = np.asarray(fhat, dtype=np.complex128)
    q = len(fhat)
    k = np.arange(q)
    out = np.empty(q, dtype=np.complex128)
    for n in range(q):
        out[n] = np.sum(fhat * np.exp(2j * np.pi * k * n / q)) / q
    return out


def is_positive_semidefinite(f, tol: float = 1e-9) -> bool:
    """True iff the transform is (numerically) real and nonnegative."""
    fhat = dft_zq(f)
    return bool(np.all(fhat.real >= -tol) and np.all(np.abs(fhat.imag) <= tol))


# ---------------------------------------------------------------------------
# full-lattice coupling sum c_alpha = sum_{y != 0} |y|^(-alpha)
# ---------------------------------------------------------------------------

_SPHERE_AREA = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}
_TRUNC_RADIUS_BUDGET = {1: 200_000_000, 2: 4000, 3: 160}


def _truncation_radius(d: int, alpha: float, tol: float) -> float:
    # tail(R) <= C_d * integral_{R - sqrt(d)}^inf r^(d-1-alpha) dr
    #          = C_d * (R - sqrt(d))^(d-alpha) / (alpha - d)
    c_d = 2.0 ** (d - 1) * _SPHERE_AREA[d]
    r = math.sqrt(d) + (tol * (alpha - d) / c_d) ** (1.0 / (d - alpha))
    return max(r, 2.0 * math.sqrt(d) + 1.0)


def _truncated_sum_l2(d: int, alpha: float, radius: int) -> float:
    if d == 1:
        total = 0.0
        chunk = 5_000_000
        y = 1
        while y <= radius:
            top = min(radius, y + chunk - 1)
            block = np.arange(y, top + 1, dtype=np.float64)
            total += 2.0 * float(np.sum(block ** (-alpha)))
            y = top + 1
        return total
    axis = np.arange(-radius, radius + 1, dtype=np.float64)
    total = 0.0
    step = max(1, int(2e7 // (len(axis) ** (d - 1))))
    for lo in range(0, len(axis), step):
        first = axis[lo : lo + step]
        if d == 2:
            r2 = first[:, None] ** 2 + axis[None, :] ** 2
        else:
            r2 = (
                first[:, None, None] ** 2
                + axis[None, :, None] ** 2
                + axis[None, None, :] ** 2
            )
        mask = (r2 > 0) & (r2 <= radius * radius)
        total += float(np.sum(np.where(mask, r2, 1.0) ** (-alpha / 2.0) * mask))
    return total


def _spectral_sum_l2(d: int, alpha: float) -> tuple[float, float]:
    """Exact evaluation through the incomplete-gamma (theta-split) form.

    Terms decay like exp(-pi |n|^2); shells are added until two consecutive
    shells contribute below 1e-20 of the running total. Returns (value,
    error bound).
    """
    with mp.workdps(30):
        s = mp.mpf(alpha) / 2
        half_d = mp.mpf(d) / 2
        total = -1 / s + 1 / (s - half_d)
        last_shells = []
        kmax = 0
        for k in range(1, 40):
            shell = mp.mpf(0)
            for n in itertools.product(range(-k, k + 1), repeat=d):
                if max(abs(c) for c in n) != k:
                    continue
                x = mp.pi * sum(c * c for c in n)
                shell += mp.gammainc(s, x) * mp.power(x, -s)
                shell += mp.gammainc(half_d - s, x) * mp.power(x, s - half_d)
            total += shell
            kmax = k
            last_shells.append(abs(shell))
            if len(last_shells) >= 2 and all(
                v < mp.mpf("1e-20") * abs(total) for v in last_shells[-2:]
            ):
                break
        value = mp.power(mp.pi, s) / mp.gamma(s) * total
        err = mp.power(mp.pi, s) / mp.gamma(s) * 4 * max(
            last_shells[-1], mp.mpf("1e-25") * abs(total)
        )
        return float(value), float(err)


def c_alpha_report(d: int, alpha: float, tol: float = 1e-8, norm: str = "l2",
                   method: str = "auto") -> dict:
    """c_alpha with its rigorous error bound and the evaluation route taken.

    The direct route sums |y|^(-alpha) over a ball and bounds the tail with an
    integral comparison; when the radius needed for `tol` is not affordable,
    an exact spectral form takes over (error far below any practical tol).
    l1/linf norms use exact shell-count zeta formulas for d <= 3.
    """
    d = int(d)
    alpha = float(alpha)
    if alpha <= d:
        raise ValueError("alpha must exceed d for a convergent coupling sum")
    if norm in ("l1", "linf"):
        if d > 3:
            raise NotImplementedError("shell formulas implemented for d <= 3")
        with mp.workdps(30):
            a = mp.mpf(alpha)
            if d == 1:
                val = 2 * mp.zeta(a)
            elif norm == "l1":
                # shell counts: 4k (d=2), 4k^2+2 (d=3)
                val = 4 * mp.zeta(a - 1) if d == 2 else 4 * mp.zeta(a - 2) + 2 * mp.zeta(a)
            else:
                # shell counts: 8k (d=2), 24k^2+2 (d=3)
                val = 8 * mp.zeta(a - 1) if d == 2 else 24 * mp.zeta(a - 2) + 2 * mp.zeta(a)
        value = float(val)
        return {"value": value, "error_bound": abs(value) * 1e-14, "method": "shell-zeta",
                "radius": None}
    if norm != "l2":
        raise ValueError(f"unknown norm {norm!r}")
    if d not in _SPHERE_AREA:
        raise NotImplementedError("l2 coupling sums implemented for d <= 3")

    radius = _truncation_radius(d, alpha, tol)
    affordable = radius <= _TRUNC_RADIUS_BUDGET[d]
    if method == "auto":
        method = "truncated" if affordable else "spectral"
    if method == "truncated":
        if not affordable:
            raise ValueError(
                f"truncation radius {radius:.3g} exceeds budget; use method='spectral'"
            )
        r_int = int(math.ceil(radius))
        value = _truncated_sum_l2(d, alpha, r_int)
        c_d = 2.0 ** (d - 1) * _SPHERE_AREA[d]
        tail = c_d * (r_int - math.sqrt(d)) ** (d - alpha) / (alpha - d)
        return {"value": value, "error_bound": tail, "method": "truncated",
                "radius": r_int}
    if method == "spectral":
        value, err = _spectral_sum_l2(d, alpha)
        return {"value": value, "error_bound": err, "method": "spectral", "radius": None}
    raise ValueError(f"unknown method {method!r}")


@functools.lru_cache(maxsize=256)
def _c_alpha_cached(d: int, alpha: float, tol: float, norm: str) -> float:
    return c_alpha_report(d, alpha, tol=tol, norm=norm)["value"]


def c_alpha(d: int, alpha: float, tol: float = 1e-8, norm: str = "l2") -> float:
    """sum over y != 0 of |y|^(-alpha), evaluated to within tol."""
    return _c_alpha_cached(int(d), float(alpha), float(tol), norm)


# ---------------------------------------------------------------------------
# coupling kernel
# ---------------------------------------------------------------------------

KERNEL_TABLE_BUDGET = 4096


@dataclass(frozen=True)
class CouplingKernel:
    """Pairwise couplings J/|x-y|^alpha (alpha=None: nearest-neighbor J).

    A dense table over the window is materialized when the window is small
    enough; larger windows fall back to on-the-fly evaluation. Couplings for
    sites outside the window are always computed on the fly, so the kernel is
    usable on any pair.
    """

    J: float
    alpha: float | None
    window: Region
    norm: str = "l2"
    table: np.ndarray | None = field(default=None, compare=False, repr=False)
    index: dict | None = field(default=None, compare=False, repr=False)

    @staticmethod
    def build(J: float, alpha: float | None, window: Region, norm: str = "l2",
              table_budget: int = KERNEL_TABLE_BUDGET) -> "CouplingKernel":
        if J <= 0:
            raise ValueError("J must be positive")
        if alpha is not None and alpha <= window.dim:
            raise ValueError("alpha must exceed the dimension")
        table = None
        index = None
        n = len(window)
        if 0 < n <= table_budget:
            pts = window.as_array().astype(np.float64)
            diff = pts[:, None, :] - pts[None, :, :]
            if norm == "l1":
                dist = np.abs(diff).sum(axis=2)
            elif norm == "linf":
                dist = np.abs(diff).max(axis=2)
            else:
                dist = np.sqrt((diff**2).sum(axis=2))
            if alpha is None:
                l1 = np.abs(diff).sum(axis=2)
                table = np.where(l1 == 1.0, float(J), 0.0)
            else:
                with np.errstate(divide="ignore"):
                    table = np.where(dist > 0, float(J) * dist ** (-float(alpha)), 0.0)
            index = {site: i for i, site in enumerate(window.sites)}
        return CouplingKernel(J=float(J), alpha=alpha, window=window, norm=norm,
                              table=table, index=index)

    def coupling(self, x, y) -> float:
        x = tuple(x)
        y = tuple(y)
        if self.index is not None and x in self.index and y in self.index:
            return float(self.table[self.index[x], self.index[y]])
        if x == y:
            return 0.0
        if self.alpha is None:
            l1 = sum(abs(a - b) for a, b in zip(x, y))
            return self.J if l1 == 1 else 0.0
        return self.J * point_norm(tuple(a - b for a, b in zip(x, y)), self.norm) ** (
            -self.alpha
        )

    def pair_matrix(self, region: Region | None = None) -> np.ndarray:
        """Dense coupling matrix over the region's sorted sites."""
        if region is None or region == self.window:
            if self.table is not None:
                return self.table
            region = self.window
        pts = region.as_array().astype(np.float64)
        diff = pts[:, None, :] - pts[None, :, :]
        if self.norm == "l1":
            dist = np.abs(diff).sum(axis=2)
        elif self.norm == "linf":
            dist = np.abs(diff).max(axis=2)
        else:
            dist = np.sqrt((diff**2).sum(axis=2))
        if self.alpha is None:
            l1 = np.abs(diff).sum(axis=2)
            return np.where(l1 == 1.0, self.J, 0.0)
        with np.errstate(divide="ignore"):
            return np.where(dist > 0, self.J * dist ** (-self.alpha), 0.0)

    def to_dict(self) -> dict:
        return {"J": self.J, "alpha": self.alpha, "norm": self.norm}


def exterior_weights(region: Region, kernel: CouplingKernel,
                     c_alpha_tol: float = 1e-10) -> tuple[np.ndarray, float]:
    """Per-site total coupling to the complement, W(x) = sum_{y not in A} J_xy.

    Power-law kernels use the complement identity
        W(x) = J * (c_alpha - sum_{y in A, y != x} |x-y|^(-alpha)),
    which is exact up to the c_alpha evaluation error; nearest-neighbor
    kernels count exterior unit neighbors. Returns (weights aligned with
    region.sites, total error bound).
    """
    n = len(region)
    if n == 0:
        return np.zeros(0), 0.0
    if kernel.alpha is None:
        w = np.empty(n)
        for i, site in enumerate(region.sites):
            outside = sum(1 for nb in site_neighbors(site) if nb not in region.site_set)
            w[i] = kernel.J * outside
        return w, 0.0
    rep = c_alpha_report(region.dim, kernel.alpha, tol=c_alpha_tol, norm=kernel.norm)
    inside = kernel.pair_matrix(region).sum(axis=1)
    w = kernel.J * rep["value"] - inside
    return w, n * kernel.J * rep["error_bound"]


# ---------------------------------------------------------------------------
# external fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FieldAssignment:
    """Per-site, per-color field h_{x,n} over a window (everything else 0)."""

    window: Region
    q: int
    values: np.ndarray  # shape (len(window), q), row i <-> window.sites[i]
    kind: str = "zero"
    params: dict = field(default_factory=dict)

    def value(self, site, color: int) -> float:
        site = tuple(site)
        if site not in self.window.site_set:
            return 0.0
        i = self.window.sites.index(site)
        return float(self.values[i, color % self.q])

    def with_values(self, values: np.ndarray, kind: str | None = None) -> "FieldAssignment":
        return FieldAssignment(window=self.window, q=self.q,
                               values=np.asarray(values, dtype=np.float64),
                               kind=kind or self.kind, params=dict(self.params))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "q": self.q, "params": dict(self.params)}


def make_field(kind: str, params: dict, window: Region, q: int,
               norm: str = "l2") -> FieldAssignment:
    """Field constructors.

    kinds:
      zero                          h = 0
      decaying(h_star, delta)       h_{x,n} = h*/|x|^delta   (h* at x = 0)
      truncated(h_star, delta, R)   decaying, but 0 for |x| < R
      gaussian(eps, seed)           eps times i.i.d. standard normals
      scalar(h, phi)                h_{x,n} = h_x * phi(n), h constant or map
    """
    n = len(window)
    vals = np.zeros((n, q))
    params = dict(params)
    if kind == "zero":
        pass
    elif kind in ("decaying", "truncated"):
        h_star = float(params["h_star"])
        delta = float(params["delta"])
        if h_star < 0 or delta <= 0:
            raise ValueError("need h_star >= 0 and delta > 0")
        r_cut = float(params.get("R", 0.0))
        if kind == "truncated" and r_cut < 1:
            raise ValueError("truncation radius R must be >= 1")
        for i, site in enumerate(window.sites):
            dist = point_norm(site, norm)
            if kind == "truncated" and dist < r_cut:
                continue
            vals[i, :] = h_star if dist == 0.0 else h_star * dist ** (-delta)
    elif kind == "gaussian":
        eps = float(params["eps"])
        if eps < 0:
            raise ValueError("eps must be >= 0")
        seed = int(params.get("seed", 0))
        rng = np.random.Generator(np.random.Philox(key=seed))
        vals = eps * rng.standard_normal((n, q))
    elif kind == "scalar":
        phi = np.asarray(params["phi"], dtype=np.float64)
        if len(phi) != q:
            raise ValueError("phi length must equal q")
        h = params["h"]
        for i, site in enumerate(window.sites):
            hx = float(h[site]) if hasattr(h, "__getitem__") and not np.isscalar(h) else float(h)
            vals[i, :] = hx * phi
    else:
        raise ValueError(f"unknown field kind {kind!r}")
    return FieldAssignment(window=window, q=q, values=vals, kind=kind, params=params)
