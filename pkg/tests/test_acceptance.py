"""Acceptance suite: one test per criterion, tagged with ``criterion(n, title)``.

The terminal summary prints a ``[PASS]``/``[FAIL]`` line per criterion.
"""

import random
import subprocess
import sys
import time
from decimal import Decimal
from fractions import Fraction

import pytest

from ncpp.coding import failure_sweep, simulate_failure
from ncpp.optimizer import GroupShape, optimize
from ncpp.report import group, plan_for, route, run
from ncpp.scenario import SHIPPED, load_scenario
from ncpp.slices import QPSK_PM
from oracles import brute_optimize, payload_decode, random_instance
from test_provisioning import run_sequence
from test_routing import check_against_brute_force, random_graphs

D = Decimal


def configs_of(row):
    return {tuple(int(p) for p in c) for c in row.configs}


@pytest.mark.criterion(1, "Table 1 slice counts on fig5 (exact, < 1 s)")
def test_table1():
    start = time.perf_counter()
    report = run(load_scenario("fig5"))
    elapsed = time.perf_counter() - start
    full = report.row("1.0")
    assert (full.no_nc_cost, full.nc_cost) == (10, 6)
    partial = [report.row(D(t) / 10).no_nc_cost for t in range(9, 0, -1)]
    assert partial == [9, 8, 7, 6, 5, 4, 3, 2, 1]
    assert elapsed < 1.0, f"took {elapsed:.3f} s"


TABLE2 = {
    "0.9": ({(100, 125)}, 5),
    "0.8": ({(100, 100)}, 4),
    "0.7": ({(100, 75), (75, 100)}, 4),
    "0.6": ({(75, 75)}, 3),
    "0.5": ({(75, 50), (50, 75)}, 3),
    "0.4": ({(50, 50)}, 2),
    "0.3": ({(50, 25), (25, 50)}, 2),
    "0.2": ({(25, 25)}, 1),
    "0.1": ({(25, 0), (0, 25)}, 1),
}


@pytest.mark.criterion(2, "Table 2 optimal configuration sets and slice counts (set-exact)")
def test_table2():
    report = run(load_scenario("fig5"))
    for target, (configs, cost) in TABLE2.items():
        row = report.row(target)
        assert (configs_of(row), row.nc_cost) == (configs, cost), target


@pytest.mark.criterion(3, "fig1 link XE: 3 slices without coding, 2 with, saving 33.3%")
def test_fig1_xe():
    report = run(load_scenario("fig1"))
    xe = report.usage_at("1.0", "XE")
    assert (xe.no_nc, xe.nc) == (3, 2)
    assert str(report.row("1.0").savings) == "33.3"


@pytest.mark.criterion(4, "fig3 protection slices: 4 at full, 2 at 50%")
def test_fig3_half():
    report = run(load_scenario("fig3"))
    full, half = report.row("1.0").nc_cost, report.row("0.5").nc_cost
    assert (full, half) == (4, 2)
    assert Fraction(full - half, full) == Fraction(1, 2)


@pytest.mark.criterion(5, "optimizer equals brute-force grid minimization on 200 random instances")
def test_oracle_equivalence():
    rng = random.Random(2024)
    mismatches = []
    for i in range(200):
        rates, target_sum, groups = random_instance(rng, max_demands=4, max_rate=400, step=25)
        row = optimize(rates, Fraction(target_sum, sum(rates)), 25, [GroupShape(g) for g in groups], m=QPSK_PM)
        cost, winners = brute_optimize(rates, target_sum, 25, groups, 25)
        if (row.cost, configs_of(row)) != (cost, winners):
            mismatches.append((i, rates, target_sum, groups))
    assert mismatches == []


@pytest.mark.criterion(6, "every optimal configuration of every shipped scenario survives every single-link cut")
def test_recoverability():
    violations, checked = [], 0
    for name in SHIPPED:
        s = load_scenario(name)
        routed = route(s)
        members = group(s, routed)
        report = run(s)
        for row in report.rows:
            for config in row.configs:
                plan = plan_for(s, routed, members, list(config.protected))
                violations += failure_sweep(plan)
                for link in s.topology.links:
                    got = simulate_failure(plan, link.id)
                    decoded = payload_decode(plan, link.id, checked)
                    for d, p in zip(routed, config.protected):
                        if decoded[d.id] < p or got[d.id] < p:
                            violations.append((name, str(config), link.id, d.id))
                    checked += 1
    assert checked > 0
    assert violations == []


@pytest.mark.criterion(7, "spectrum ownership and disjoint pairs match naive oracles")
def test_structural_invariants():
    for seed in range(500):
        run_sequence(seed)
    for case in random_graphs(100, seed=31):
        check_against_brute_force(*case)


@pytest.mark.criterion(8, "two runs of `tables --paper` are byte-identical")
def test_determinism():
    cmd = [sys.executable, "-m", "ncpp", "tables", "--paper"]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first and first == second
