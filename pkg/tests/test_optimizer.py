import random
from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncpp.errors import UnreachableTargetError, ValidationError
from ncpp.optimizer import (
    GroupShape,
    ProtectionConfig,
    enumerate_configs,
    evaluate_config,
    optimize,
    sweep_targets,
    uncoded,
)
from ncpp.slices import QPSK_PM
from oracles import brute_optimize, random_instance

RATES = (100, 150)
PAIR = [GroupShape((0, 1))]
D = Decimal


def as_tuples(configs):
    return [tuple(int(p) for p in c) for c in configs]


def test_enumerate_ninety_percent():
    assert as_tuples(enumerate_configs(RATES, D("0.9"), 25)) == [(100, 125), (75, 150)]


def test_enumerate_full_is_unique():
    assert as_tuples(enumerate_configs(RATES, 1, 25)) == [(100, 150)]


def test_enumerate_half_matches_grid_scan():
    grid = {(a, b) for a in range(0, 101, 25) for b in range(0, 151, 25) if a + b == 125}
    got = as_tuples(enumerate_configs(RATES, D("0.5"), 25))
    # Zero protection for one demand is on the grid too, hence (0, 125).
    assert set(got) == grid == {(100, 25), (75, 50), (50, 75), (25, 100), (0, 125)}
    assert got == sorted(got, reverse=True)


def test_enumerate_respects_min_protected():
    got = as_tuples(enumerate_configs(RATES, D("0.5"), 25, min_protected=[50, 0]))
    assert got == [(100, 25), (75, 50), (50, 75)]


def test_off_grid_target_names_nearest_sums():
    with pytest.raises(UnreachableTargetError) as err:
        enumerate_configs(RATES, D("0.95"), 25)
    assert err.value.nearest == (225, 250)
    assert "225" in str(err.value) and "250" in str(err.value)
    assert as_tuples(enumerate_configs(RATES, D("0.95"), 25, round_nearest=True)) == [(100, 150)]


def test_target_beyond_grid_capacity():
    # 110 Gb/s protects at most 100 on a 25 Gb/s grid.
    with pytest.raises(UnreachableTargetError) as err:
        enumerate_configs([110], 1, 25)
    assert err.value.nearest == (100,)


@pytest.mark.parametrize("target", [D("-0.1"), D("1.5")])
def test_target_outside_unit_interval(target):
    with pytest.raises(ValidationError):
        enumerate_configs(RATES, target, 25)


@pytest.mark.parametrize("config, expected", [((100, 125), 5), ((75, 150), 6), ((0, 0), 0)])
def test_evaluate_coded_link(config, expected):
    assert evaluate_config(ProtectionConfig(tuple(map(D, config)), D(25)), PAIR, "coded-link", QPSK_PM) == expected


def test_evaluate_network_wide():
    # Tail X-Z plus one-hop feeders A-X and B-X.
    shape = [GroupShape((0, 1), 1, (1, 1))]
    assert evaluate_config((100, 150), shape, "network", QPSK_PM) == 6 + 4 + 6
    assert evaluate_config((100, 150), uncoded(shape), "network", QPSK_PM) == 2 * 4 + 2 * 6


def test_unknown_objective():
    with pytest.raises(ValidationError):
        evaluate_config((100, 150), PAIR, "latency", QPSK_PM)


@pytest.mark.parametrize(
    "target, configs, cost",
    [
        ("0.9", {(100, 125)}, 5),
        ("0.5", {(75, 50), (50, 75)}, 3),
        ("0.2", {(25, 25)}, 1),
    ],
)
def test_optimize_examples(target, configs, cost):
    row = optimize(RATES, D(target), 25, PAIR, m=QPSK_PM)
    assert set(as_tuples(row.configs)) == configs
    assert row.cost == cost


def test_sweep_columns():
    targets = [D(t) / 10 for t in range(10, 0, -1)]
    result = sweep_targets(RATES, targets, 25, PAIR, m=QPSK_PM)
    assert [r.no_nc_cost for r in result.rows] == [10, 9, 8, 7, 6, 5, 4, 3, 2, 1]
    assert [r.nc_cost for r in result.rows] == [6, 5, 4, 4, 3, 3, 2, 2, 1, 1]
    assert result.rows[0].savings == D("40.0")


def test_sweep_collects_errors_and_continues():
    result = sweep_targets(RATES, [D("0.95"), D("0.9")], 25, PAIR, m=QPSK_PM)
    assert result.rows[0].error and "nearest" in result.rows[0].error
    assert result.rows[1].nc_cost == 5
    assert result.errors == [result.rows[0]]


def _check(rates, target_sum, groups, objective="coded-link", hops=None, method="auto"):
    shapes = [
        GroupShape(g, *(hops[k] if hops else (1, ())))
        for k, g in enumerate(groups)
    ]
    row = optimize(rates, Fraction(target_sum, sum(rates)), 25, shapes, objective, QPSK_PM, method=method)
    cost, winners = brute_optimize(rates, target_sum, 25, groups, 25, objective, hops)
    assert row.cost == cost
    assert set(as_tuples(row.configs)) == winners
    return row


def test_random_instances_match_brute_force_network_objective():
    rng = random.Random(11)
    for _ in range(60):
        rates, target_sum, groups = random_instance(rng)
        hops = [(rng.randint(0, 3), tuple(rng.randint(0, 3) for _ in g)) for g in groups]
        _check(rates, target_sum, groups, "network", hops)


def test_dynamic_program_agrees_with_exhaustive():
    rng = random.Random(5)
    for _ in range(60):
        rates, target_sum, groups = random_instance(rng, max_rate=200)
        ex = _check(rates, target_sum, groups, method="exhaustive")
        dp = _check(rates, target_sum, groups, method="dp")
        assert ex.configs == dp.configs


def test_many_demands_use_dynamic_program():
    rates = [50, 75, 100, 25, 50, 100, 75, 50, 25, 100]
    groups = [GroupShape((0, 1, 2)), GroupShape((3, 4)), GroupShape((5, 6, 7)), GroupShape((8,))]
    target = Fraction(325, sum(rates))
    fast = optimize(rates, target, 25, groups, m=QPSK_PM)
    slow = optimize(rates, target, 25, groups, m=QPSK_PM, method="exhaustive")
    assert fast == slow


def test_uncovered_demands_are_free():
    row = optimize([100, 100], D("0.5"), 25, [GroupShape((0,))], m=QPSK_PM)
    assert row.cost == 0
    assert as_tuples(row.configs)[0] == (0, 100)


instances = st.integers(min_value=0, max_value=10**6).map(lambda s: random_instance(random.Random(s), max_rate=200))


@settings(max_examples=60, deadline=None)
@given(instances)
def test_optimal_cost_is_monotone_in_target(inst):
    rates, _, groups = inst
    shapes = [GroupShape(g) for g in groups]
    costs = [optimize(rates, Fraction(u * 25, sum(rates)), 25, shapes, m=QPSK_PM).cost for u in range(sum(rates) // 25 + 1)]
    assert costs == sorted(costs)


@settings(max_examples=60, deadline=None)
@given(instances)
def test_coding_dominates(inst):
    rates, target_sum, groups = inst
    shapes = [GroupShape(g) for g in groups]
    target = Fraction(target_sum, sum(rates))
    nc = optimize(rates, target, 25, shapes, m=QPSK_PM)
    plain = optimize(rates, target, 25, uncoded(shapes), m=QPSK_PM)
    assert nc.cost <= plain.cost
    if nc.cost == plain.cost:
        # Equality needs at most one active member per group in some plain optimum.
        assert any(
            all(sum(1 for i in s.members if c.protected[i] > 0) <= 1 for s in shapes)
            for c in plain.configs
        )


@settings(max_examples=60, deadline=None)
@given(instances, st.randoms(use_true_random=False))
def test_permutation_equivariance(inst, rnd):
    rates, target_sum, groups = inst
    perm = list(range(len(rates)))
    rnd.shuffle(perm)  # new index j holds old demand perm[j]
    where = {old: new for new, old in enumerate(perm)}
    target = Fraction(target_sum, sum(rates))
    a = optimize(rates, target, 25, [GroupShape(g) for g in groups], m=QPSK_PM)
    b = optimize([rates[i] for i in perm], target, 25, [GroupShape(tuple(where[i] for i in g)) for g in groups], m=QPSK_PM)
    assert a.cost == b.cost
    assert {tuple(c.protected[i] for i in perm) for c in a.configs} == {c.protected for c in b.configs}
