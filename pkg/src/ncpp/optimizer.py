"""Joint partial-protection / network-coding configuration search.

Two steps: list every per-demand protection vector on the step grid whose
sum meets the aggregate target, then cost each one with its protection
signals coded per group, and keep the cheapest (all ties).

Costs are additive over coding groups, so for more than
:data:`EXHAUSTIVE_LIMIT` demands the search switches to a dynamic program
over the shared sum budget that solves each group independently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterator, Sequence

from ncpp.errors import NcppError, UnreachableTargetError, ValidationError
from ncpp.slices import GridSpec, ModulationFormat, Rate, as_rate, coded_slices, format_rate, slices_for_rate

CODED_LINK = "coded-link"
NETWORK = "network"
OBJECTIVES = (CODED_LINK, NETWORK)

EXHAUSTIVE_LIMIT = 8


@dataclass(frozen=True)
class ProtectionConfig:
    protected: tuple[Decimal, ...]
    step: Decimal

    def __str__(self):
        return "+".join(format_rate(p) for p in self.protected)

    def __iter__(self):
        return iter(self.protected)

    def __len__(self):
        return len(self.protected)


@dataclass(frozen=True)
class GroupShape:
    """Cost model of one coding group, independent of the protected rates.

    ``members`` index into the demand rate vector. ``tail_hops`` is the
    length of the coded tail and ``feeder_hops`` the per-member distance
    to the encode node; both only matter for the network-wide objective.
    """

    members: tuple[int, ...]
    tail_hops: int = 1
    feeder_hops: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.feeder_hops:
            object.__setattr__(self, "feeder_hops", (0,) * len(self.members))
        if len(self.feeder_hops) != len(self.members):
            raise ValueError("feeder_hops must match members")

    def split(self) -> tuple[GroupShape, ...]:
        """The same demands without coding: one singleton per member."""
        return tuple(GroupShape((i,), self.tail_hops + f) for i, f in zip(self.members, self.feeder_hops))

    def cost(self, rates: Sequence[Decimal], objective: str, m: ModulationFormat, g: GridSpec) -> int:
        coded = coded_slices(rates, m, g)
        if objective == CODED_LINK:
            return coded
        if objective == NETWORK:
            feeders = sum(h * slices_for_rate(r, m, g) for h, r in zip(self.feeder_hops, rates))
            return self.tail_hops * coded + feeders
        raise ValidationError(f"unknown objective {objective!r}; expected one of {OBJECTIVES}")


def _grid_bounds(rates, step, min_protected):
    step_f = Fraction(step)
    upper = [math.floor(Fraction(r) / step_f) for r in rates]
    lower = [math.ceil(Fraction(p) / step_f) for p in min_protected]
    for i, (lo, hi) in enumerate(zip(lower, upper)):
        if lo > hi:
            raise ValidationError(f"min_protected of demand {i} exceeds what the step grid allows")
    return lower, upper


def target_units(
    rates: Sequence[Rate],
    target: Rate | float,
    step: Rate,
    min_protected: Sequence[Rate] | None = None,
    round_nearest: bool = False,
) -> int:
    """Aggregate protected sum, in steps, for ``target`` of the total rate."""
    rates = [as_rate(r) for r in rates]
    step = as_rate(step)
    if step <= 0:
        raise ValidationError(f"step must be positive, got {step}")
    frac = Fraction(str(target)) if isinstance(target, float) else Fraction(target)
    if not 0 <= frac <= 1:
        raise ValidationError(f"target must lie in [0, 1], got {target}")
    lower, upper = _grid_bounds(rates, step, min_protected or [0] * len(rates))
    lo, hi = sum(lower), sum(upper)
    want = frac * sum(Fraction(r) for r in rates) / Fraction(step)
    if want.denominator == 1 and lo <= want <= hi:
        return int(want)
    below = min(max(math.floor(want), lo), hi)
    above = max(min(math.ceil(want), hi), lo)
    if round_nearest:
        # Ties round up: more protection is the conservative choice.
        return below if want - below < above - want else above
    nearest = tuple(sorted({below * step, above * step}))
    raise UnreachableTargetError(
        f"target {target} needs a protected sum of {format_rate(want * Fraction(step))} Gb/s; "
        f"nearest attainable on the {format_rate(step)} Gb/s grid: "
        + ", ".join(format_rate(n) for n in nearest),
        nearest,
    )


def _vectors(lower: Sequence[int], upper: Sequence[int], total: int) -> Iterator[tuple[int, ...]]:
    """Integer vectors within bounds summing to ``total``, lexicographically descending."""
    if not lower:
        if total == 0:
            yield ()
        return
    rest_lo, rest_hi = sum(lower[1:]), sum(upper[1:])
    for v in range(min(upper[0], total - rest_lo), max(lower[0], total - rest_hi) - 1, -1):
        for tail in _vectors(lower[1:], upper[1:], total - v):
            yield (v,) + tail


def enumerate_configs(
    rates: Sequence[Rate],
    target: Rate | float,
    step: Rate,
    min_protected: Sequence[Rate] | None = None,
    round_nearest: bool = False,
) -> list[ProtectionConfig]:
    """Every protection vector on the step grid that meets ``target`` exactly.

    Ordered lexicographically descending, so configurations that protect the
    earlier demands more come first.

    Raises:
        UnreachableTargetError: the target sum is not on the grid.
    """
    step = as_rate(step)
    mins = min_protected or [0] * len(rates)
    total = target_units(rates, target, step, mins, round_nearest)
    lower, upper = _grid_bounds([as_rate(r) for r in rates], step, mins)
    return [ProtectionConfig(tuple(u * step for u in v), step) for v in _vectors(lower, upper, total)]


def evaluate_config(
    c: ProtectionConfig | Sequence[Rate],
    groups: Sequence[GroupShape],
    objective: str,
    m: ModulationFormat,
    g: GridSpec = GridSpec(),
) -> int:
    """Slices needed by configuration ``c``.

    ``coded-link`` sums the coded channel width of every group; ``network``
    also multiplies by hop counts and adds the feeders.
    """
    protected = [as_rate(p) for p in c]
    return sum(shape.cost([protected[i] for i in shape.members], objective, m, g) for shape in groups)


def uncoded(groups: Sequence[GroupShape]) -> tuple[GroupShape, ...]:
    return tuple(s for shape in groups for s in shape.split())


@dataclass(frozen=True)
class OptimumRow:
    target: Decimal
    configs: tuple[ProtectionConfig, ...]
    cost: int


class _Costs:
    """Memoized per-group costs keyed by member unit vectors."""

    def __init__(self, groups, objective, m, g, step):
        self.groups = tuple(groups)
        self.step = step

        @lru_cache(maxsize=None)
        def cost(k: int, units: tuple[int, ...]) -> int:
            return self.groups[k].cost([u * step for u in units], objective, m, g)

        self.cost = cost


def _covered(n: int, groups: Sequence[GroupShape]) -> list[GroupShape | None]:
    seen: set[int] = set()
    for shape in groups:
        for i in shape.members:
            if not 0 <= i < n:
                raise ValidationError(f"group member index {i} out of range")
            if i in seen:
                raise ValidationError(f"demand {i} appears in two groups")
            seen.add(i)
    return [None if i in seen else GroupShape((i,)) for i in range(n)]


def _exhaustive(lower, upper, total, costs: _Costs):
    best, winners = None, []
    for v in _vectors(lower, upper, total):
        c = sum(costs.cost(k, tuple(v[i] for i in shape.members)) for k, shape in enumerate(costs.groups))
        if best is None or c < best:
            best, winners = c, [v]
        elif c == best:
            winners.append(v)
    return best, winners


def _dynamic(n, lower, upper, total, costs: _Costs, free: Sequence[int]):
    # blocks: one per coding group plus one per uncovered (zero-cost) demand.
    blocks: list[tuple[tuple[int, ...], int | None]] = [(s.members, k) for k, s in enumerate(costs.groups)]
    blocks += [((i,), None) for i in free]

    tables = []
    for members, k in blocks:
        table: dict[int, tuple[int, list[tuple[int, ...]]]] = {}
        for units in product(*(range(lower[i], upper[i] + 1) for i in members)):
            c = 0 if k is None else costs.cost(k, units)
            s = sum(units)
            if s not in table or c < table[s][0]:
                table[s] = (c, [units])
            elif c == table[s][0]:
                table[s][1].append(units)
        tables.append(table)

    # suffix[b][u]: min cost of blocks b.. given they absorb exactly u steps.
    suffix: list[dict[int, int]] = [dict() for _ in range(len(blocks) + 1)]
    suffix[len(blocks)] = {0: 0}
    for b in range(len(blocks) - 1, -1, -1):
        acc: dict[int, int] = {}
        for s, (c, _) in tables[b].items():
            for u, rest in suffix[b + 1].items():
                if s + u <= total and (s + u not in acc or c + rest < acc[s + u]):
                    acc[s + u] = c + rest
        suffix[b] = acc
    if total not in suffix[0]:
        return None, []
    best = suffix[0][total]

    winners = []

    def walk(b, budget, remaining, assigned):
        if b == len(blocks):
            if budget == 0 and remaining == 0:
                vec = [0] * n
                for members, units in assigned:
                    for i, u in zip(members, units):
                        vec[i] = u
                winners.append(tuple(vec))
            return
        for s, (c, options) in tables[b].items():
            rest = suffix[b + 1].get(budget - s)
            if rest is not None and c + rest == remaining:
                for units in options:
                    walk(b + 1, budget - s, remaining - c, assigned + [(blocks[b][0], units)])

    walk(0, total, best, [])
    winners.sort(reverse=True)
    return best, winners


def optimize(
    rates: Sequence[Rate],
    target: Rate | float,
    step: Rate,
    groups: Sequence[GroupShape],
    objective: str = CODED_LINK,
    m: ModulationFormat | None = None,
    g: GridSpec = GridSpec(),
    min_protected: Sequence[Rate] | None = None,
    method: str = "auto",
    round_nearest: bool = False,
) -> OptimumRow:
    """Cheapest configurations for one target.

    Args:
        method: ``"exhaustive"``, ``"dp"``, or ``"auto"`` (dp beyond
            :data:`EXHAUSTIVE_LIMIT` demands). Both return the same optimum
            and the same tie set.

    Returns:
        All optimal configurations, lexicographically descending.
    """
    if m is None:
        raise ValidationError("a modulation format is required")
    if objective not in OBJECTIVES:
        raise ValidationError(f"unknown objective {objective!r}; expected one of {OBJECTIVES}")
    rates = [as_rate(r) for r in rates]
    step = as_rate(step)
    mins = [as_rate(p) for p in (min_protected or [0] * len(rates))]
    total = target_units(rates, target, step, mins, round_nearest)
    lower, upper = _grid_bounds(rates, step, mins)
    free = [i for i, s in enumerate(_covered(len(rates), groups)) if s is not None]
    costs = _Costs(groups, objective, m, g, step)
    if method == "auto":
        method = "dp" if len(rates) > EXHAUSTIVE_LIMIT else "exhaustive"
    if method == "exhaustive":
        best, winners = _exhaustive(lower, upper, total, costs)
    elif method == "dp":
        best, winners = _dynamic(len(rates), lower, upper, total, costs, free)
    else:
        raise ValueError(f"unknown method {method!r}")
    configs = tuple(ProtectionConfig(tuple(u * step for u in v), step) for v in winners)
    return OptimumRow(as_rate(target), configs, best)


@dataclass(frozen=True)
class SweepRow:
    target: Decimal
    configs: tuple[ProtectionConfig, ...] = ()
    nc_cost: int | None = None
    no_nc_cost: int | None = None
    error: str | None = None

    @property
    def savings(self) -> Decimal | None:
        """Percent saved by coding, to one decimal."""
        if self.nc_cost is None or self.no_nc_cost is None:
            return None
        if self.no_nc_cost == 0:
            return Decimal("0.0")
        pct = Decimal(self.no_nc_cost - self.nc_cost) * 100 / Decimal(self.no_nc_cost)
        return pct.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)

    @property
    def errors(self) -> list[SweepRow]:
        return [r for r in self.rows if r.error]


def sweep_targets(
    rates: Sequence[Rate],
    targets: Sequence[Rate | float],
    step: Rate,
    groups: Sequence[GroupShape],
    objective: str = CODED_LINK,
    m: ModulationFormat | None = None,
    g: GridSpec = GridSpec(),
    min_protected: Sequence[Rate] | None = None,
    round_nearest: bool = False,
) -> SweepResult:
    """One row per target with the coded optimum and the uncoded baseline.

    A target that fails (off-grid, bad value) yields a row with ``error``
    set; the remaining targets still run.
    """
    result = SweepResult()
    baseline = uncoded(groups)
    kw = dict(objective=objective, m=m, g=g, min_protected=min_protected, round_nearest=round_nearest)
    for t in targets:
        try:
            nc = optimize(rates, t, step, groups, **kw)
            plain = optimize(rates, t, step, baseline, **kw)
        except NcppError as exc:
            result.rows.append(SweepRow(as_rate(t), error=str(exc)))
            continue
        result.rows.append(SweepRow(nc.target, nc.configs, nc.cost, plain.cost))
    return result
