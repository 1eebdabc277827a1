import dataclasses
import math

import numpy as np
import pytest

from lrspin.interactions import CouplingKernel, InteractionSpec, make_field
from lrspin.lattice import Region, box
from lrspin.randomfield import (
    OrderedPartition,
    delta,
    delta_draws,
    gaussian_mass_tails,
    tail_check,
    theta_field,
)
from lrspin.spin_model import ModelInstance, SpinConfig


def build_model(window, q, beta=0.8, kind="zero", params=None, alpha=3.0):
    spec = InteractionSpec.potts(q)
    kernel = CouplingKernel.build(J=1.0, alpha=alpha, window=window)
    field = make_field(kind, params or {}, window, q=q)
    return ModelInstance(kernel=kernel, interaction=spec, field=field, beta=beta)


def random_partition(window, q, rng):
    return OrderedPartition.from_labels(window, rng.integers(0, q, len(window)), q)


def test_partition_validation():
    window = box((2, 2))
    a = Region([(0, 0), (0, 1)])
    b = Region([(1, 0), (1, 1)])
    OrderedPartition(window=window, parts=(a, b))
    with pytest.raises(ValueError):
        OrderedPartition(window=window, parts=(a, a))
    with pytest.raises(ValueError):
        OrderedPartition(window=window, parts=(a, Region([(1, 0)])))
    with pytest.raises(ValueError):
        OrderedPartition(window=window, parts=(a,))


def test_labels_round_trip():
    window = box((3, 2))
    rng = np.random.default_rng(0)
    for _ in range(20):
        labels = rng.integers(0, 4, len(window))
        part = OrderedPartition.from_labels(window, labels, 4)
        assert np.array_equal(part.labels(), labels)
    with pytest.raises(ValueError):
        OrderedPartition.from_labels(window, np.full(len(window), 4), 4)


def test_partition_from_config():
    window = box((2, 3))
    rng = np.random.default_rng(1)
    spins = rng.integers(0, 3, len(window))
    cfg = SpinConfig(window, spins, 0)
    part = OrderedPartition.from_config(cfg, 3)
    assert np.array_equal(part.labels(), spins)
    for n, piece in enumerate(part.parts):
        assert piece.site_set == {s for s, v in zip(window.sites, spins) if v == n}


def set_formula_convolve(a, b):
    # the union-of-intersections definition, assembled with region algebra
    q = a.q
    parts = []
    for n in range(q):
        acc = Region((), dim=a.window.dim)
        for s in range(q):
            t = (n - s) % q
            acc = acc.union(a.parts[s].intersection(b.parts[t]))
        parts.append(acc)
    return OrderedPartition(window=a.window, parts=tuple(parts))


def test_convolve_matches_set_formula():
    window = box((3, 2))
    rng = np.random.default_rng(2)
    for _ in range(50):
        a = random_partition(window, 3, rng)
        b = random_partition(window, 3, rng)
        lib = a.convolve(b)
        ref = set_formula_convolve(a, b)
        for n in range(3):
            assert lib.parts[n].site_set == ref.parts[n].site_set


def test_group_laws():
    window = box((2, 2))
    q = 4
    rng = np.random.default_rng(3)
    ident = OrderedPartition.identity(window, q)
    assert ident.is_identity()
    for _ in range(50):
        a = random_partition(window, q, rng)
        b = random_partition(window, q, rng)
        c = random_partition(window, q, rng)
        assert a.convolve(ident).parts == a.parts
        assert a.convolve(b).parts == b.convolve(a).parts
        assert a.convolve(b.convolve(c)).parts == a.convolve(b).convolve(c).parts
        assert a.convolve(a.inverse()).is_identity()
        power = a
        for _ in range(q - 1):
            power = power.convolve(a)
        assert power.is_identity()


def test_theta_field_hand_example():
    window = box((2, 1))
    q = 3
    field = make_field("zero", {}, window, q=q).with_values(
        np.array([[0.0, 1.0, 2.0], [10.0, 11.0, 12.0]]))
    part = OrderedPartition.from_labels(window, [1, 2], q)
    moved = theta_field(part, field)
    assert np.array_equal(moved.values, [[1.0, 2.0, 0.0], [12.0, 10.0, 11.0]])


def test_theta_group_action():
    window = box((2, 2))
    q = 3
    rng = np.random.default_rng(4)
    field = make_field("gaussian", {"eps": 1.0, "seed": 8}, window, q=q)
    for _ in range(30):
        a = random_partition(window, q, rng)
        b = random_partition(window, q, rng)
        via_pair = theta_field(a, theta_field(b, field))
        via_conv = theta_field(a.convolve(b), field)
        assert np.array_equal(via_pair.values, via_conv.values)
        cycled = field
        for _ in range(q):
            cycled = theta_field(a, cycled)
        assert np.array_equal(cycled.values, field.values)
    ident = OrderedPartition.identity(window, q)
    assert np.array_equal(theta_field(ident, field).values, field.values)


def test_theta_field_validation():
    window = box((2, 2))
    field = make_field("zero", {}, window, q=3)
    other = OrderedPartition.identity(box((3, 1)), 3)
    with pytest.raises(ValueError):
        theta_field(other, field)
    wrong_q = OrderedPartition.identity(window, 2)
    with pytest.raises(ValueError):
        theta_field(wrong_q, field)


def test_delta_identity_partition_is_exactly_zero():
    model = build_model(box((2, 2)), 3, kind="gaussian",
                        params={"eps": 0.5, "seed": 3})
    ident = OrderedPartition.identity(model.window, 3)
    assert delta(ident, model) == 0.0


def test_delta_zero_field_is_exactly_zero():
    model = build_model(box((2, 2)), 3)
    rng = np.random.default_rng(5)
    for _ in range(10):
        part = random_partition(model.window, 3, rng)
        assert delta(part, model) == 0.0


def test_delta_color_constant_field_invariance():
    window = box((2, 2))
    rng = np.random.default_rng(6)
    base = build_model(window, 3, kind="gaussian", params={"eps": 0.4, "seed": 9})
    per_site = rng.normal(size=(len(window), 1))
    shifted_field = base.field.with_values(base.field.values + per_site)
    shifted = dataclasses.replace(base, field=shifted_field)
    for _ in range(10):
        part = random_partition(window, 3, rng)
        assert delta(part, shifted) == pytest.approx(delta(part, base), abs=1e-10)
    constant_only = dataclasses.replace(
        base, field=base.field.with_values(np.broadcast_to(per_site, (4, 3)).copy()))
    part = random_partition(window, 3, rng)
    assert delta(part, constant_only) == 0.0


def test_delta_antisymmetry():
    window = box((2, 2))
    rng = np.random.default_rng(7)
    model = build_model(window, 3, kind="gaussian", params={"eps": 0.6, "seed": 12})
    for _ in range(10):
        part = random_partition(window, 3, rng)
        forward = delta(part, model)
        relabeled = dataclasses.replace(model, field=theta_field(part, model.field))
        backward = delta(part.inverse(), relabeled)
        assert backward == pytest.approx(-forward, abs=1e-12)


def test_delta_draws_match_single_shot():
    window = box((2, 2))
    q = 3
    model = build_model(window, q, beta=1.1)
    rng_check = np.random.Generator(np.random.Philox(key=77))
    eps = 0.3
    part = OrderedPartition.from_labels(window, [0, 1, 2, 1], q)
    batched = delta_draws(part, model, 5, eps, seed=77)
    h = eps * rng_check.standard_normal((5, len(window), q))
    for i in range(5):
        inst = dataclasses.replace(model, field=model.field.with_values(h[i]))
        assert batched[i] == pytest.approx(delta(part, inst), abs=1e-9)


def test_delta_draws_mean_zero():
    window = box((2, 2))
    model = build_model(window, 3, beta=0.9)
    part = OrderedPartition.from_labels(window, [1, 0, 2, 0], 3)
    draws = delta_draws(part, model, 4000, eps=0.2, seed=21)
    se = draws.std(ddof=1) / math.sqrt(len(draws))
    assert abs(draws.mean()) <= 3 * se


def test_disagreement_support_inclusion():
    # the active set of A * A'^{-1} sits inside the symmetric differences
    window = box((3, 2))
    q = 3
    rng = np.random.default_rng(8)
    for _ in range(200):
        a = random_partition(window, q, rng)
        b = random_partition(window, q, rng)
        active = a.convolve(b.inverse()).active_sites().site_set
        sym = set()
        for n in range(q):
            sym |= a.parts[n].site_set ^ b.parts[n].site_set
        assert active <= sym


def test_tail_check_small_run():
    window = box((2, 2))
    model = build_model(window, 2, beta=0.8)
    part = OrderedPartition.from_labels(window, [1, 1, 0, 0], 2)
    report = tail_check(part, model, n_draws=2000,
                        lambda_grid=[0.05, 0.2, 0.5, 1.0], eps=0.1, seed=5)
    assert report["holds"]
    assert report["active_sites"] == 2
    assert abs(report["mean"]) <= 3 * report["mean_se"]
    for rec in report["records"]:
        assert 0.0 <= rec["empirical"] <= 1.0


def test_gaussian_mass_tail_ordering():
    records = gaussian_mass_tails(9, eps=0.1, lambda_grid=[0.1, 0.5, 1.0, 2.0])
    for rec in records:
        assert rec["exact_normal"] <= rec["bound_quoted"] <= rec["bound_halved"]
    assert records[-1]["exact_normal"] < 1e-6
