"""Exhaustive single-window verification of the contour energy bound.

Enumerates every configuration of a 4x4 window (exterior color 0) with an
odometer walk, maintaining the disagreement energies and the support pair
sums incrementally, and recomputing the hole structure per state with a
small flood fill. With separation parameters at or above threshold the
incorrect points of such a window always form one cluster, so each
non-aligned state carries exactly one (external) contour.

The arithmetic here is deliberately self-contained; tests cross-check it
against the plain-Python contour path on random states.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .bounds import compute_constants
from .interactions import InteractionSpec, c_alpha

SIDE = 4          # window side
ESIDE = SIDE + 2  # extended grid side (window plus a unit ring)
PSIDE = SIDE + 4  # padded grid side for the flood fill
NCELL = SIDE * SIDE
NEXT = ESIDE * ESIDE
NPAD = PSIDE * PSIDE

DEFAULT_ALPHAS = (2.5, 3.0, 4.0)


def _geometry_arrays():
    win = [(x, y) for x in range(SIDE) for y in range(SIDE)]
    ext = [(x, y) for x in range(-1, SIDE + 1) for y in range(-1, SIDE + 1)]
    eidx = {s: i for i, s in enumerate(ext)}
    widx = {s: i for i, s in enumerate(win)}

    ewin = np.full(NEXT, -1, np.int64)
    for s, i in widx.items():
        ewin[eidx[s]] = i
    wext = np.array([eidx[s] for s in win], np.int64)

    nbr = np.full((NEXT, 4), -1, np.int64)
    for s, i in eidx.items():
        for k, (dx, dy) in enumerate(((1, 0), (-1, 0), (0, 1), (0, -1))):
            t = (s[0] + dx, s[1] + dy)
            if t in eidx:
                nbr[i, k] = eidx[t]

    aff = np.zeros((NCELL, 5), np.int64)
    for s, i in widx.items():
        cells = [s] + [(s[0] + dx, s[1] + dy)
                       for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1))]
        aff[i] = [eidx[c] for c in cells]

    wpad = np.array([(s[0] + 2) * PSIDE + (s[1] + 2) for s in win], np.int64)
    pext = np.full(NPAD, -1, np.int64)
    for s, i in eidx.items():
        pext[(s[0] + 2) * PSIDE + (s[1] + 2)] = i
    return win, ext, ewin, wext, nbr, aff, wpad, pext


_WIN, _EXT, EWIN, WEXT, NBR, AFF, WPAD, PEXT = _geometry_arrays()


def window_tables(alphas=DEFAULT_ALPHAS, J: float = 1.0):
    """Coupling tables for the window and the extended grid, one per alpha."""
    na = len(alphas)
    j16 = np.zeros((na, NCELL, NCELL))
    w16 = np.zeros((na, NCELL))
    p36 = np.zeros((na, NEXT, NEXT))
    ca = np.zeros(na)
    win = np.array(_WIN, np.float64)
    ext = np.array(_EXT, np.float64)
    for a, alpha in enumerate(alphas):
        d = np.sqrt(((win[:, None, :] - win[None, :, :]) ** 2).sum(-1))
        with np.errstate(divide="ignore"):
            j16[a] = np.where(d > 0, J * d ** -float(alpha), 0.0)
        ca[a] = J * c_alpha(2, float(alpha), tol=1e-12)
        w16[a] = ca[a] - j16[a].sum(axis=1)
        de = np.sqrt(((ext[:, None, :] - ext[None, :, :]) ** 2).sum(-1))
        with np.errstate(divide="ignore"):
            p36[a] = np.where(de > 0, J * de ** -float(alpha), 0.0)
    return j16, w16, p36, ca


@njit(cache=True)
def _cell_color(digits, e, ewin):
    w = ewin[e]
    if w >= 0:
        return digits[w]
    return 0


@njit(cache=True)
def _cell_incorrect(digits, e, ewin, nbr):
    c = _cell_color(digits, e, ewin)
    for k in range(4):
        t = nbr[e, k]
        if t >= 0:
            if _cell_color(digits, t, ewin) != c:
                return True
        elif c != 0:
            # neighbor beyond the extended grid always carries color 0
            return True
    return False


@njit(cache=True)
def _hole_f_terms(q, digits, mask, p36, ca, wext, wpad, pext, ewin,
                  hole_buf, group_buf, visited, stack, out):
    """Flood-fill from the pad ring; sum F over each same-label hole union.

    out[a] receives sum_n F(I_n) for each alpha. Returns the hole count.
    """
    na = p36.shape[0]
    for a in range(na):
        out[a] = 0.0
    for g in range(NPAD):
        visited[g] = 0
    # flood the complement of the support, starting from the pad corner
    stack[0] = 0
    visited[0] = 1
    top = 1
    while top > 0:
        top -= 1
        g = stack[top]
        gx = g // PSIDE
        gy = g % PSIDE
        for k in range(4):
            if k == 0:
                nx, ny = gx + 1, gy
            elif k == 1:
                nx, ny = gx - 1, gy
            elif k == 2:
                nx, ny = gx, gy + 1
            else:
                nx, ny = gx, gy - 1
            if nx < 0 or nx >= PSIDE or ny < 0 or ny >= PSIDE:
                continue
            h = nx * PSIDE + ny
            if visited[h]:
                continue
            e = pext[h]
            if e >= 0 and mask[e]:
                continue
            visited[h] = 1
            stack[top] = h
            top += 1
    nholes = 0
    for i in range(NCELL):
        hole_buf[i] = 0
        if mask[wext[i]] == 0 and visited[wpad[i]] == 0:
            hole_buf[i] = 1
            nholes += 1
    if nholes == 0:
        return 0
    # group hole cells by their color; each group is one I_n union
    for color in range(q):
        cnt = 0
        for i in range(NCELL):
            if hole_buf[i] and digits[i] == color:
                group_buf[cnt] = wext[i]
                cnt += 1
        if cnt == 0:
            continue
        for a in range(na):
            pair = 0.0
            for u in range(cnt):
                for v in range(cnt):
                    if u != v:
                        pair += p36[a, group_buf[u], group_buf[v]]
            out[a] += ca[a] * cnt - pair
    return nholes


@njit(cache=True)
def _exhaustive(q, psis, j16, w16, p36, ca, c2s, ewin, wext, nbr, aff,
                wpad, pext):
    ns = psis.shape[0]
    na = j16.shape[0]
    digits = np.zeros(NCELL, np.int64)
    energy = np.zeros((ns, na))
    mask = np.zeros(NEXT, np.uint8)
    ps = np.zeros(na)
    nbad = 0

    min_margin = np.full((ns, na), 1e300)
    arg_state = np.zeros((ns, na, NCELL), np.int64)
    hole_buf = np.zeros(NCELL, np.uint8)
    group_buf = np.zeros(NCELL, np.int64)
    visited = np.zeros(NPAD, np.uint8)
    stack = np.zeros(NPAD, np.int64)
    fholes = np.zeros(na)

    total = 1
    for _ in range(NCELL):
        total *= q

    for _step in range(total - 1):
        # odometer increment with carries; each digit change updates the
        # energies and the support mask incrementally
        pos = 0
        while True:
            old = digits[pos]
            new = 0 if old == q - 1 else old + 1
            for sp in range(ns):
                for a in range(na):
                    de = w16[a, pos] * (psis[sp, new, 0] - psis[sp, old, 0])
                    for j in range(NCELL):
                        de += j16[a, pos, j] * (
                            psis[sp, new, digits[j]] - psis[sp, old, digits[j]]
                        )
                    energy[sp, a] += de
            digits[pos] = new
            for t in range(5):
                e = aff[pos, t]
                bad = _cell_incorrect(digits, e, ewin, nbr)
                if bad and mask[e] == 0:
                    for a in range(na):
                        acc = 0.0
                        for y in range(NEXT):
                            if mask[y]:
                                acc += p36[a, e, y]
                        ps[a] += 2.0 * acc
                    mask[e] = 1
                    nbad += 1
                elif not bad and mask[e] == 1:
                    mask[e] = 0
                    for a in range(na):
                        acc = 0.0
                        for y in range(NEXT):
                            if mask[y]:
                                acc += p36[a, e, y]
                        ps[a] -= 2.0 * acc
                    nbad -= 1
            if new != 0:
                break
            pos += 1

        _hole_f_terms(q, digits, mask, p36, ca, wext, wpad, pext, ewin,
                      hole_buf, group_buf, visited, stack, fholes)
        for a in range(na):
            geom = nbad + (ca[a] * nbad - ps[a]) + fholes[a]
            for sp in range(ns):
                margin = energy[sp, a] - c2s[sp, a] * geom
                if margin < min_margin[sp, a]:
                    min_margin[sp, a] = margin
                    for i in range(NCELL):
                        arg_state[sp, a, i] = digits[i]
    return min_margin, arg_state, total - 1


@njit(cache=True)
def _margins_for_states(states, psis, j16, w16, p36, ca, ewin, wext, nbr,
                        aff, wpad, pext):
    n = states.shape[0]
    ns = psis.shape[0]
    na = j16.shape[0]
    q = psis.shape[1]
    lhs = np.zeros((n, ns, na))
    geom = np.zeros((n, na))
    nbads = np.zeros(n, np.int64)
    mask = np.zeros(NEXT, np.uint8)
    hole_buf = np.zeros(NCELL, np.uint8)
    group_buf = np.zeros(NCELL, np.int64)
    visited = np.zeros(NPAD, np.uint8)
    stack = np.zeros(NPAD, np.int64)
    fholes = np.zeros(na)
    for t in range(n):
        digits = states[t]
        for sp in range(ns):
            for a in range(na):
                acc = 0.0
                for i in range(NCELL):
                    acc += w16[a, i] * psis[sp, digits[i], 0]
                    for j in range(i + 1, NCELL):
                        acc += j16[a, i, j] * psis[sp, digits[i], digits[j]]
                lhs[t, sp, a] = acc
        nbad = 0
        for e in range(NEXT):
            bad = _cell_incorrect(digits, e, ewin, nbr)
            mask[e] = 1 if bad else 0
            if bad:
                nbad += 1
        nbads[t] = nbad
        _hole_f_terms(q, digits, mask, p36, ca, wext, wpad, pext, ewin,
                      hole_buf, group_buf, visited, stack, fholes)
        for a in range(na):
            ps = 0.0
            for x in range(NEXT):
                if mask[x]:
                    for y in range(NEXT):
                        if mask[y]:
                            ps += p36[a, x, y]
            geom[t, a] = nbad + (ca[a] * nbad - ps) + fholes[a]
    return lhs, geom, nbads


def _interaction_tables(q: int, interactions):
    specs = []
    names = []
    for name in interactions:
        if name == "potts":
            specs.append(InteractionSpec.potts(q))
        elif name == "clock":
            specs.append(InteractionSpec.clock(q))
        else:
            raise ValueError(f"unknown interaction {name!r}")
        names.append(name)
    psis = np.zeros((len(specs), q, q))
    for k, spec in enumerate(specs):
        idx = (np.arange(q)[:, None] - np.arange(q)[None, :]) % q
        psis[k] = spec.psi[idx]
    return specs, names, psis


def exhaustive_energy_check(q: int, alphas=DEFAULT_ALPHAS, J: float = 1.0,
                            interactions=("potts", "clock")) -> dict:
    """Scan all q^16 window states; report worst margins of the bound.

    Margins are lhs - rhs of the energy bound for the single contour of each
    state; the bound holds on every state iff every margin is positive.
    """
    specs, names, psis = _interaction_tables(q, interactions)
    j16, w16, p36, ca = window_tables(alphas, J)
    c2s = np.zeros((len(specs), len(alphas)))
    for k, spec in enumerate(specs):
        for a, alpha in enumerate(alphas):
            c2s[k, a] = compute_constants(2, float(alpha), J, q, spec.m).c2
    min_margin, arg_state, n_states = _exhaustive(
        q, psis, j16, w16, p36, ca, c2s, EWIN, WEXT, NBR, AFF, WPAD, PEXT
    )
    return {
        "q": q,
        "J": J,
        "alphas": tuple(float(a) for a in alphas),
        "interactions": tuple(names),
        "n_states": int(n_states),
        "min_margin": min_margin,
        "argmin_state": arg_state,
        "all_hold": bool(np.all(min_margin > 0.0)),
    }


def margins_for_states(states: np.ndarray, q: int, alphas=DEFAULT_ALPHAS,
                       J: float = 1.0, interactions=("potts", "clock")):
    """Bound sides for explicit window states, fully recomputed per state.

    Returns (lhs, rhs, nbad): lhs has shape (n, n_interactions, n_alphas),
    rhs likewise, nbad is the incorrect-point count per state.
    """
    states = np.ascontiguousarray(np.asarray(states, np.int64))
    if states.ndim != 2 or states.shape[1] != NCELL:
        raise ValueError("states must have shape (n, 16)")
    specs, _, psis = _interaction_tables(q, interactions)
    j16, w16, p36, ca = window_tables(alphas, J)
    lhs, geom, nbads = _margins_for_states(
        states, psis, j16, w16, p36, ca, EWIN, WEXT, NBR, AFF, WPAD, PEXT
    )
    c2s = np.zeros((len(specs), len(alphas)))
    for k, spec in enumerate(specs):
        for a, alpha in enumerate(alphas):
            c2s[k, a] = compute_constants(2, float(alpha), J, q, spec.m).c2
    rhs = c2s[None, :, :] * geom[:, None, :]
    return lhs, rhs, nbads
