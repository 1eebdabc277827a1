import math

import numpy as np
import pytest

from lrspin.bounds import compute_constants, peierls_tail
from lrspin.enumeration import (
    ExactResult,
    contour_census,
    exact_partition,
    expectation,
    griffiths_checks,
    interaction_log_weights,
    peierls_comparison,
    state_count,
    state_digits,
)
from lrspin.interactions import CouplingKernel, InteractionSpec, make_field
from lrspin.lattice import box, site_neighbors
from lrspin.spin_model import (
    ModelInstance,
    SpinConfig,
    hamiltonian_phi,
    hamiltonian_psi,
)


def nn_model(window, q, beta, kind="zero", params=None, interaction=None,
             J=1.0, alpha=None):
    spec = interaction or InteractionSpec.potts(q)
    kernel = CouplingKernel.build(J=J, alpha=alpha, window=window)
    field = make_field(kind, params or {}, window, q=q)
    return ModelInstance(kernel=kernel, interaction=spec, field=field, beta=beta)


def test_state_digits_round_trip():
    q, n = 3, 5
    digits = state_digits(q, n, 0, q**n)
    assert digits.shape == (243, 5)
    weights = q ** np.arange(n - 1, -1, -1)
    recon = digits.astype(np.int64) @ weights
    assert np.array_equal(recon, np.arange(243))


def test_state_count_budget():
    assert state_count(2, 10) == 1024
    with pytest.raises(ValueError):
        state_count(3, 20)


def test_log_weights_match_hamiltonian():
    # the vectorized energy accumulator against the per-config reference
    window = box((2, 3))
    q = 3
    rng = np.random.default_rng(11)
    for kind, params in [("zero", {}), ("gaussian", {"eps": 0.4, "seed": 5}),
                         ("decaying", {"h_star": 0.7, "delta": 2.0})]:
        for interaction in (InteractionSpec.potts(q), InteractionSpec.clock(q)):
            model = nn_model(window, q, beta=0.9, kind=kind, params=params,
                             interaction=interaction, alpha=3.0)
            states = rng.integers(0, 3**6, size=40)
            digits = np.stack([state_digits(q, 6, s, s + 1)[0] for s in states])
            for form in ("phi", "psi"):
                lw = interaction_log_weights(model, digits, form)
                for row, state_digits_row in enumerate(digits):
                    cfg = SpinConfig(window, state_digits_row.astype(np.int64), 0)
                    h = (hamiltonian_phi(cfg, model) if form == "phi"
                         else hamiltonian_psi(cfg, model))
                    assert lw[row] == pytest.approx(-0.9 * h, abs=1e-10)


def test_exact_partition_two_by_two_hand_oracle():
    # independent 16-state loop for the 2x2 Potts window with aligned exterior
    window = box((2, 2))
    beta = 0.3
    model = nn_model(window, 2, beta)
    sites = window.sites
    edges = [(i, j) for i in range(4) for j in range(i + 1, 4)
             if sum(abs(a - b) for a, b in zip(sites[i], sites[j])) == 1]
    assert len(edges) == 4
    z = 0.0
    marg = np.zeros((4, 2))
    e_sum = 0.0
    for s0 in range(2):
        for s1 in range(2):
            for s2 in range(2):
                for s3 in range(2):
                    sp = (s0, s1, s2, s3)
                    energy = -sum(1.0 for i, j in edges if sp[i] == sp[j])
                    energy -= sum(2.0 for v in sp if v == 0)
                    w = math.exp(-beta * energy)
                    z += w
                    e_sum += w * energy
                    for i, v in enumerate(sp):
                        marg[i, v] += w
    res = exact_partition(model)
    assert res.log_Z == pytest.approx(math.log(z), abs=1e-12)
    assert np.allclose(res.marginals, marg / z, atol=1e-12)
    assert res.expectations["energy"] == pytest.approx(e_sum / z, abs=1e-10)


def test_single_site_closed_form():
    window = box((1, 1))
    q = 4
    spec = InteractionSpec.clock(q)
    model = nn_model(window, q, beta=1.3, interaction=spec, alpha=3.0)
    w = model.boundary_weights[0]
    logits = 1.3 * w * spec.phi
    probs = np.exp(logits - logits.max())
    probs /= probs.sum()
    res = exact_partition(model)
    assert np.allclose(res.marginals[0], probs, atol=1e-12)
    direct = math.log(np.exp(logits).sum())
    assert res.log_Z == pytest.approx(direct, abs=1e-12)


def test_marginals_rows_sum_to_one():
    model = nn_model(box((3, 2)), 3, beta=0.8, kind="gaussian",
                     params={"eps": 0.3, "seed": 2}, alpha=2.5)
    res = exact_partition(model)
    assert np.allclose(res.marginals.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(res.marginals >= 0)


def test_forms_related_by_interaction_scale():
    # gap units: the psi measure at beta is the phi measure at beta/scale
    window = box((2, 2))
    q = 3
    spec = InteractionSpec.clock(q)
    assert spec.scale == pytest.approx(1.5)
    beta = 0.7
    psi_model = nn_model(window, q, beta=beta, interaction=spec, alpha=3.0,
                         kind="gaussian", params={"eps": 0.2, "seed": 9})
    phi_model = nn_model(window, q, beta=beta / spec.scale, interaction=spec,
                         alpha=3.0, kind="gaussian",
                         params={"eps": 0.2, "seed": 9})
    res_psi = exact_partition(psi_model, form="psi")
    res_phi = exact_partition(phi_model, form="phi")
    assert np.allclose(res_psi.marginals, res_phi.marginals, atol=1e-11)
    ground = SpinConfig.constant(window, 0, 0)
    shift = (beta / spec.scale) * hamiltonian_phi(ground, phi_model)
    assert res_psi.log_Z == pytest.approx(res_phi.log_Z + shift, abs=1e-10)


def test_potts_forms_share_marginals():
    model = nn_model(box((2, 2)), 2, beta=0.6)
    a = exact_partition(model, form="phi")
    b = exact_partition(model, form="psi")
    assert np.allclose(a.marginals, b.marginals, atol=1e-12)
    ground_energy = hamiltonian_phi(SpinConfig.constant(model.window, 0, 0), model)
    assert a.log_Z == pytest.approx(b.log_Z - 0.6 * ground_energy, abs=1e-10)


def test_extreme_beta_stays_finite():
    model = nn_model(box((2, 2)), 3, beta=5000.0, alpha=3.0)
    res = exact_partition(model, form="psi")
    assert math.isfinite(res.log_Z)
    assert np.all(res.marginals[:, 0] > 1.0 - 1e-12)


def test_expectation_table_and_callable_agree():
    model = nn_model(box((2, 2)), 3, beta=0.5, kind="gaussian",
                     params={"eps": 0.5, "seed": 3})
    digits = state_digits(3, 4, 0, 81)
    table = (digits == 1).sum(axis=1).astype(float)
    by_table = expectation(model, table)
    by_fn = expectation(model, lambda d: (d == 1).sum(axis=1).astype(float))
    assert by_table == pytest.approx(by_fn, abs=1e-13)
    ones = expectation(model, np.ones(81))
    assert ones == pytest.approx(1.0, abs=1e-13)
    res = exact_partition(model)
    count = sum(res.marginals[i, 1] for i in range(4))
    assert by_table == pytest.approx(count, abs=1e-11)


def test_expectation_rejects_short_table():
    model = nn_model(box((2, 2)), 2, beta=0.5)
    with pytest.raises(ValueError):
        expectation(model, np.ones(7))


def test_exact_partition_rejects_bad_form():
    model = nn_model(box((2, 2)), 2, beta=0.5)
    with pytest.raises(ValueError):
        exact_partition(model, form="free")


def test_griffiths_potts_ising():
    model = nn_model(box((2, 2)), 2, beta=0.6, alpha=3.0)
    report = griffiths_checks(model, trials=30, seed=1)
    assert report["all_hold"]
    for name in ("first", "second", "field", "volume"):
        assert report[name]["violations"] == 0


def test_griffiths_clock_q3():
    spec = InteractionSpec.clock(3)
    model = nn_model(box((2, 2)), 3, beta=0.7, interaction=spec, alpha=2.5)
    report = griffiths_checks(model, trials=25, seed=4)
    assert report["all_hold"]


def test_griffiths_single_site_magnetization_positive():
    # one explicit instance: <cos(2 pi sigma_0 / q)> > 0 under an aligned field
    q = 3
    window = box((2, 2))
    spec = InteractionSpec.potts(q)
    model = nn_model(window, q, beta=0.5, interaction=spec,
                     kind="scalar", params={"h": 0.3, "phi": spec.phi})
    val = expectation(model, lambda d: np.cos(2 * np.pi * d[:, 0] / q))
    assert val > 0.1


def test_peierls_comparison_bounds_hold():
    q = 3
    model = nn_model(box((2, 2)), q, beta=1.0, alpha=3.0)
    consts = compute_constants(2, 3.0, 1.0, q, 1.0)
    threshold = (consts.c1 + math.log(q)) / consts.c2
    grid = [0.5, threshold * 1.05, consts.beta0, threshold * 2.5]
    records = peierls_comparison(model, grid)
    assert [r["convergent"] for r in records] == [False, True, True, True]
    assert all(r["holds"] for r in records)
    mus = [r["mu_max"] for r in records]
    assert mus[0] > 0
    assert mus[0] > mus[1] >= mus[2] >= mus[3]
    at_beta0 = records[2]
    assert at_beta0["tail"] == pytest.approx(0.25, abs=1e-12)
    assert peierls_tail(consts.beta0, consts, q) == at_beta0["tail"]


def test_peierls_comparison_needs_power_law():
    model = nn_model(box((2, 2)), 2, beta=1.0)
    with pytest.raises(ValueError):
        peierls_comparison(model, [1.0])


# ------------------------------------------------------- census oracle


def brute_census(d, q, n_max, side):
    """Independent recount: incorrect points straight from the definition."""
    corner = tuple(-((side - 1) // 2) for _ in range(d))
    window = box(tuple(side for _ in range(d)), corner=corner)
    sites = window.sites
    cand = set(sites)
    for s in sites:
        cand.update(site_neighbors(s))
    origin = (0,) * d
    seen = {}
    for state in range(1, q ** len(sites)):
        digits = state_digits(q, len(sites), state, state + 1)[0]
        color = {s: int(v) for s, v in zip(sites, digits)}
        bad = []
        for t in sorted(cand):
            ct = color.get(t, 0)
            ring = [color.get(u, 0) for u in site_neighbors(t)]
            if any(c != ct for c in ring):
                bad.append(t)
        spins = tuple(color.get(t, 0) for t in bad)
        seen[(tuple(bad), spins)] = len(bad)
    counts = {n: 0 for n in range(1, n_max + 1)}
    for (support, _spins), size in seen.items():
        if size <= n_max and origin in support:
            counts[size] += 1
    return counts


def test_census_d1_q2_matches_brute_force():
    side = 7
    report = contour_census(1, 2, 5, side)
    assert report["counts"] == brute_census(1, 2, 5, side)
    assert report["counts"] == {1: 0, 2: 0, 3: 3, 4: 10, 5: 5}
    assert report["holds"]


def test_census_d1_growth_pattern():
    # sizes 3 and 5 saturate; size 4 keeps growing with the window because
    # a long flipped block contributes only its two wall pairs (4 sites)
    for side in range(7, 13):
        counts = contour_census(1, 2, 5, side)["counts"]
        assert counts[3] == 3
        assert counts[4] == 2 * side - 4
        assert counts[5] == 5


def test_census_d2_q3_matches_brute_force():
    report = contour_census(2, 3, 5, 3)
    assert report["counts"] == brute_census(2, 3, 5, 3)
    assert report["counts"] == {1: 0, 2: 0, 3: 0, 4: 0, 5: 10}
    assert report["n_configs"] == 3**9 - 1
    assert report["holds"]


def test_census_d2_q2_single_flips():
    report = contour_census(2, 2, 5, 4)
    assert report["counts"] == {1: 0, 2: 0, 3: 0, 4: 0, 5: 5}
    assert report["holds"]
    assert report["bound"][5] == pytest.approx(math.exp(5 * (math.log(2) + 1.0)))
