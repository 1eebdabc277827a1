"""Quantitative constants and inequality checkers for the contour estimates.

Everything here evaluates closed-form constants or checks a single instance
of an inequality, reporting both sides so callers (and tests) can inspect
margins instead of bare booleans.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .contour import Contour, erase, surface_coupling
from .interactions import c_alpha
from .lattice import l1_ball, point_norm
from .spin_model import ModelInstance, SpinConfig

# Bernoulli numbers B_2, B_4, B_6 for the Euler-Maclaurin correction
_BERNOULLI = (1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0)


def zeta_series(s: float, terms: int = 400) -> float:
    """Riemann zeta for s > 1 by direct series plus Euler-Maclaurin tail.

    With a few hundred explicit terms the correction chain below is accurate
    to well under 1e-12 relative for every s >= 1.1.
    """
    if s <= 1.0:
        raise ValueError("need s > 1")
    n = np.arange(1, terms, dtype=np.float64)
    total = float(np.sum(n**-s))
    big_n = float(terms)
    total += big_n ** (1.0 - s) / (s - 1.0) + 0.5 * big_n**-s
    # derivative corrections: B_{2k}/(2k)! * (s)_{2k-1} * N^{-s-2k+1}
    poch = s
    fact = 2.0
    power = big_n ** (-s - 1.0)
    for k, b in enumerate(_BERNOULLI, start=1):
        total += b / fact * poch * power
        poch *= (s + 2 * k - 1) * (s + 2 * k)
        fact *= (2 * k + 1) * (2 * k + 2)
        power /= big_n * big_n
    return total


@dataclass(frozen=True)
class BoundConstants:
    """All constants of the contour estimate for one parameter set."""

    a: float
    c_alpha: float
    kappa2: float
    M_min: float
    c2: float
    c1: float
    beta0: float


def compute_constants(d: int, alpha: float, J: float, q: int, m: float,
                      c1: float = 1.0) -> BoundConstants:
    """Evaluate the constant chain.

    a controls the cluster separation exponent; kappa2 bounds the coupling a
    cluster can lose to far-away regions; c2 is the per-site energy gain of
    the bound; beta0 is where the contour series starts converging.
    """
    if alpha <= d:
        raise ValueError("alpha must exceed d")
    if J <= 0 or m <= 0 or q < 2 or c1 <= 0:
        raise ValueError("need J > 0, m > 0, q >= 2, c1 > 0")
    gap = min(alpha - d, 1.0)
    a = 3.0 * (d + 1) / gap
    zeta_arg = a / (d + 1) - 1.0
    kappa2 = (1.0 + 1.0 / J) * (
        J * 2.0 ** (d - 1 + alpha) * math.e ** (d - 1) / (alpha - d)
        + 3.0 * zeta_series(zeta_arg)
    )
    ca = c_alpha(d, alpha, tol=1e-12)
    c2 = m / ((2 * d + 1) * 2.0 ** (alpha + 1)) * min(J * ca, 0.125)
    m_min = (2.0 ** (alpha + 5) * (2 * d + 1) * kappa2 / m) ** (1.0 / gap)
    beta0 = (c1 + math.log(2 * d + 1) + math.log(q)) / c2
    return BoundConstants(a=a, c_alpha=ca, kappa2=kappa2, M_min=m_min,
                          c2=c2, c1=c1, beta0=beta0)


def check_ball_coupling_bound(x, y, alpha: float, k: int = 1,
                              norm: str = "l2") -> dict:
    """Coupling from x to a unit-scale ball around y versus the direct line.

    Averaged over the l1-ball of radius k around y, the couplings are at
    most 2^alpha times the coupling to y itself, provided |x - y| >= 2k.
    Reports lhs = |x-y|^-alpha, rhs = the scaled ball average, and whether
    the precondition held.
    """
    x = tuple(x)
    y = tuple(y)
    if k < 1:
        raise ValueError("k must be >= 1")
    sep_l1 = sum(abs(a - b) for a, b in zip(x, y))
    if sep_l1 <= k:
        raise ValueError("x lies inside the ball around y")
    offsets = _ball_offsets(len(y), k)
    dist = point_norm(tuple(a - b for a, b in zip(x, y)), norm)
    lhs = dist**-alpha
    ball_sum = sum(
        point_norm(tuple(a - b - o for a, b, o in zip(x, y, off)), norm) ** -alpha
        for off in offsets
    )
    rhs = ball_sum / (2.0**alpha * len(offsets))
    applicable = dist >= 2.0 * k
    return {
        "lhs": lhs,
        "rhs": rhs,
        "holds": lhs >= rhs,
        "margin": lhs - rhs,
        "applicable": applicable,
        "ball_size": len(offsets),
    }


@functools.lru_cache(maxsize=None)
def _ball_offsets(dim: int, k: int) -> tuple:
    return l1_ball((0,) * dim, k).sites


def check_support_coupling_bound(config: SpinConfig, contour: Contour, y,
                                 model: ModelInstance) -> dict:
    """Disagreement energy available inside the unit ball of a support site.

    Every incorrect point sees two disagreeing spins within its closed unit
    ball, at mutual distance at most 2, so some pair there costs at least
    m * J / 2^alpha. Reports the best pair and the floor.
    """
    y = tuple(y)
    if y not in contour.support.site_set:
        raise ValueError("y must lie on the contour support")
    alpha = model.kernel.alpha
    floor = model.interaction.m * model.kernel.J * (
        1.0 if alpha is None else 2.0**-alpha
    )
    ball = l1_ball(y, 1)
    best = 0.0
    witness = None
    psi = model.interaction.psi
    q = model.q
    for i, u in enumerate(ball.sites):
        su = config.spin_at(u)
        for v in ball.sites[i + 1:]:
            sv = config.spin_at(v)
            if su == sv:
                continue
            cost = model.kernel.coupling(u, v) * psi[(su - sv) % q]
            if cost > best:
                best = cost
                witness = (u, v)
    return {
        "lhs": best,
        "rhs": floor,
        "holds": best >= floor - 1e-12,
        "margin": best - floor,
        "witness": witness,
    }


def _interaction_psi_energy(config: SpinConfig, model: ModelInstance) -> float:
    # pair + boundary parts of the disagreement form; the field is handled by
    # separate arguments, so the contour bound is field-free
    s = config.spins
    psi = model.psi_table
    pair = 0.5 * float(np.sum(model.pair_couplings * psi[s][:, s]))
    bd = float(np.dot(model.boundary_weights, psi[s, config.exterior_color]))
    return pair + bd


def verify_energy_bound(config: SpinConfig, model: ModelInstance,
                        contour: Contour, constants: BoundConstants,
                        diagnostics: bool = False) -> dict:
    """Energy released by erasing one contour versus its surface estimate.

    lhs: interaction disagreement energy of the configuration minus that of
    the erased configuration. rhs: c2 times (support size + surface coupling
    of the support + surface coupling of each same-label interior union).
    """
    erased = erase(config, contour, model.q)
    lhs = _interaction_psi_energy(config, model) - _interaction_psi_energy(erased, model)
    f_support = surface_coupling(contour.support, model.kernel)
    groups = contour.interiors_by_label()
    f_groups = {lab: surface_coupling(reg, model.kernel) for lab, reg in groups.items()}
    rhs = constants.c2 * (contour.size + f_support + sum(f_groups.values()))
    out = {
        "lhs": lhs,
        "rhs": rhs,
        "holds": lhs >= rhs - 1e-9,
        "margin": lhs - rhs,
    }
    if diagnostics:
        out["f_support"] = f_support
        out["f_interiors"] = f_groups
        out["support_size"] = contour.size
    return out


def peierls_tail(beta: float, constants: BoundConstants, q: int) -> float:
    """Geometric contour-series bound on the chance of a misaligned site.

    Sums e^{-n (beta c2 - c1 - log q)} over contour sizes n >= 1; infinite
    when the exponent is not positive.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    drop = beta * constants.c2 - constants.c1 - math.log(q)
    if drop <= 0:
        return math.inf
    t = math.exp(-drop)
    return t / (1.0 - t)
