"""XOR coding of protection signals toward a common destination.

A coding group merges the protection signals of several demands at an
encode node; from there a single coded channel, sized for the fastest
member, runs to the shared destination. Under a single link failure the
destination recovers a lost working signal by XOR-ing the coded signal with
the surviving working signals of the other members.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from decimal import Decimal
from typing import Iterable, Mapping, Sequence

from ncpp.errors import InfeasibleGroupError, ValidationError
from ncpp.provisioning import Allocation, ChannelRequest, SpectrumState, first_fit_assign
from ncpp.slices import GridSpec, ModulationFormat, as_rate, coded_slices, slices_for_rate
from ncpp.topology import Topology, links_on_path

Path = tuple[str, ...]


@dataclass(frozen=True)
class ProtectionSignal:
    demand: str
    protected_rate: Decimal
    protection_path: Path

    def __post_init__(self):
        object.__setattr__(self, "protected_rate", as_rate(self.protected_rate))
        object.__setattr__(self, "protection_path", tuple(self.protection_path))
        if self.protected_rate < 0:
            raise ValueError(f"protected_rate of {self.demand!r} is negative")

    @property
    def destination(self) -> str:
        return self.protection_path[-1]


@dataclass(frozen=True)
class CodingGroup:
    members: tuple[ProtectionSignal, ...]
    encode_node: str
    destination: str
    tail_path: Path
    feeder_paths: tuple[Path, ...]

    @classmethod
    def from_signals(cls, signals: Sequence[ProtectionSignal]) -> CodingGroup:
        signals = tuple(signals)
        encode = find_encode_node(signals)
        first = signals[0].protection_path
        tail = first[first.index(encode):]
        feeders = tuple(s.protection_path[: s.protection_path.index(encode) + 1] for s in signals)
        return cls(signals, encode, tail[-1], tail, feeders)

    @property
    def id(self) -> str:
        return "+".join(self.demand_ids)

    @property
    def demand_ids(self) -> tuple[str, ...]:
        return tuple(s.demand for s in self.members)

    def with_rates(self, rates: Mapping[str, Decimal]) -> CodingGroup:
        members = tuple(replace(s, protected_rate=as_rate(rates[s.demand])) for s in self.members)
        return replace(self, members=members)


@dataclass(frozen=True)
class FailureScenario:
    failed_link: str


@dataclass(frozen=True)
class Feasibility:
    ok: bool
    reason: str = ""

    def __bool__(self):
        return self.ok


def find_encode_node(signals: Sequence[ProtectionSignal]) -> str:
    """First node of the longest node suffix shared by every protection path."""
    if not signals:
        raise ValidationError("empty coding group")
    dests = {s.destination for s in signals}
    if len(dests) != 1:
        raise InfeasibleGroupError(f"members do not share a destination: {sorted(dests)}")
    paths = [s.protection_path for s in signals]
    return paths[0][-_shared_suffix(paths)]


def _shared_suffix(paths: Sequence[Sequence[str]]) -> int:
    shared = 0
    while shared < min(map(len, paths)) and len({p[-1 - shared] for p in paths}) == 1:
        shared += 1
    return shared


def _structure_problem(g: CodingGroup) -> str:
    if len(g.feeder_paths) != len(g.members):
        return "feeder paths do not match members"
    n = len(g.tail_path)
    for s, feeder in zip(g.members, g.feeder_paths):
        p = s.protection_path
        if p[-1] != g.destination:
            return f"{s.demand} does not end at destination {g.destination}"
        if g.encode_node not in p:
            return f"protection path of {s.demand} misses encode node {g.encode_node}"
        if p[-n:] != g.tail_path or g.tail_path[0] != g.encode_node:
            return f"coded tail is not a suffix of the protection path of {s.demand}"
        if feeder + g.tail_path[1:] != p:
            return f"feeder of {s.demand} does not reach the encode node"
    return ""


def coding_feasible(
    g: CodingGroup, working_paths: Mapping[str, Sequence[str]], topology: Topology
) -> Feasibility:
    """Whether every member survives any single link failure.

    Member ``d`` must have a working path that (a) avoids the coded tail and
    every member's feeder, and (b) shares no link with any other member's
    working path. Condition (a) covers all feeders, not just ``d``'s own: a
    cut feeder of another member corrupts the coded signal just as a cut
    tail does.
    """
    problem = _structure_problem(g)
    if problem:
        return Feasibility(False, problem)
    work = {d: set(links_on_path(topology, working_paths[d])) for d in g.demand_ids}
    tail = set(links_on_path(topology, g.tail_path))
    feeders = {s.demand: set(links_on_path(topology, f)) for s, f in zip(g.members, g.feeder_paths)}
    for d in g.demand_ids:
        if work[d] & tail:
            return Feasibility(False, f"working path of {d} overlaps the coded tail")
        for e, links in feeders.items():
            if work[d] & links:
                who = "its own feeder" if e == d else f"the feeder of {e}"
                return Feasibility(False, f"working path of {d} overlaps {who}")
    ids = g.demand_ids
    for i, d in enumerate(ids):
        for e in ids[i + 1:]:
            if work[d] & work[e]:
                return Feasibility(False, "member working paths not disjoint")
    return Feasibility(True)


def build_coded_channels(g: CodingGroup, m: ModulationFormat, grid: GridSpec = GridSpec()) -> list[ChannelRequest]:
    """Feeder requests for members with nonzero protected rate, then the coded tail."""
    problem = _structure_problem(g)
    if problem:
        raise InfeasibleGroupError(f"group {g.id}: {problem}")
    out = []
    for s, feeder in zip(g.members, g.feeder_paths):
        if s.protected_rate > 0 and len(feeder) > 1:
            out.append(ChannelRequest(f"{s.demand}:feeder", feeder, slices_for_rate(s.protected_rate, m, grid)))
    rates = [s.protected_rate for s in g.members]
    out.append(ChannelRequest(f"{g.id}:coded", g.tail_path, coded_slices(rates, m, grid)))
    return out


@dataclass(frozen=True)
class RoutedDemand:
    id: str
    rate: Decimal
    working: Path
    protection: Path

    @property
    def source(self) -> str:
        return self.working[0]

    @property
    def destination(self) -> str:
        return self.working[-1]


@dataclass
class ProtectionPlan:
    """Provisioned demands, coding groups and their spectrum."""

    topology: Topology
    demands: tuple[RoutedDemand, ...]
    groups: tuple[CodingGroup, ...]
    modulation: ModulationFormat
    grid: GridSpec
    state: SpectrumState
    allocations: dict[str, Allocation] = field(default_factory=dict)

    @property
    def protected(self) -> dict[str, Decimal]:
        return {s.demand: s.protected_rate for g in self.groups for s in g.members}

    def group_of(self, demand_id: str) -> CodingGroup:
        for g in self.groups:
            if demand_id in g.demand_ids:
                return g
        raise KeyError(demand_id)


def make_groups(
    demands: Sequence[RoutedDemand],
    protected: Mapping[str, Decimal],
    group_members: Iterable[Sequence[str]] = (),
    coding: bool = True,
) -> tuple[CodingGroup, ...]:
    """Coding groups for ``group_members``; uncovered demands become singletons.

    With ``coding=False`` every demand is a singleton, i.e. plain 1+1.
    """
    by_id = {d.id: d for d in demands}
    groups: list[CodingGroup] = []
    covered: set[str] = set()
    for members in (group_members if coding else ()):
        for d in members:
            if d not in by_id:
                raise ValidationError(f"coding group references unknown demand {d!r}")
            if d in covered:
                raise ValidationError(f"demand {d!r} appears in two coding groups")
            covered.add(d)
        groups.append(
            CodingGroup.from_signals(
                [ProtectionSignal(d, protected[d], by_id[d].protection) for d in members]
            )
        )
    for d in demands:
        if d.id not in covered:
            groups.append(CodingGroup.from_signals([ProtectionSignal(d.id, protected[d.id], d.protection)]))
    order = {d.id: i for i, d in enumerate(demands)}
    groups.sort(key=lambda g: min(order[m] for m in g.demand_ids))
    return tuple(groups)


def build_plan(
    topology: Topology,
    demands: Sequence[RoutedDemand],
    protected: Mapping[str, Decimal],
    group_members: Iterable[Sequence[str]],
    m: ModulationFormat,
    grid: GridSpec = GridSpec(),
    coding: bool = True,
) -> ProtectionPlan:
    """Check group feasibility and first-fit all channels.

    Working channels go first in demand order, then each group's feeders
    and coded tail.
    """
    groups = make_groups(demands, protected, group_members, coding)
    working = {d.id: d.working for d in demands}
    for g in groups:
        verdict = coding_feasible(g, working, topology)
        if not verdict:
            raise InfeasibleGroupError(f"group {g.id}: {verdict.reason}")
    state = SpectrumState(topology)
    plan = ProtectionPlan(topology, tuple(demands), groups, m, grid, state)
    for d in demands:
        req = ChannelRequest(f"{d.id}:working", d.working, slices_for_rate(d.rate, m, grid))
        plan.allocations[req.owner] = first_fit_assign(state, req)
    for g in groups:
        for req in build_coded_channels(g, m, grid):
            plan.allocations[req.owner] = first_fit_assign(state, req)
    return plan


def simulate_failure(plan: ProtectionPlan, f: FailureScenario | str) -> dict[str, Decimal]:
    """Rate delivered to each demand when one link is cut.

    A demand with an intact working path gets its full rate. Otherwise it
    gets its protected rate if the coded tail, every active feeder of its
    group, and the working paths of the other active members all survive;
    else nothing. Members with zero protected rate are inactive.
    """
    link = f.failed_link if isinstance(f, FailureScenario) else f
    topo = plan.topology
    if not topo.has_link(link):
        raise ValidationError(f"unknown link {link!r}")
    working = {d.id: d.working for d in plan.demands}
    delivered: dict[str, Decimal] = {}
    for d in plan.demands:
        if link not in links_on_path(topo, d.working):
            delivered[d.id] = d.rate
            continue
        g = plan.group_of(d.id)
        rate = {s.demand: s.protected_rate for s in g.members}
        if rate[d.id] == 0:
            delivered[d.id] = Decimal(0)
            continue
        cut = link in links_on_path(topo, g.tail_path)
        for s, feeder in zip(g.members, g.feeder_paths):
            if s.protected_rate > 0:
                cut = cut or link in links_on_path(topo, feeder)
                if s.demand != d.id:
                    cut = cut or link in links_on_path(topo, working[s.demand])
        delivered[d.id] = Decimal(0) if cut else rate[d.id]
    return delivered


@dataclass(frozen=True)
class Violation:
    failed_link: str
    demand: str
    delivered: Decimal
    protected: Decimal


def failure_sweep(plan: ProtectionPlan) -> list[Violation]:
    """Cut every link in turn; list each demand that gets less than its protected rate."""
    protected = plan.protected
    out = []
    for link in plan.topology.links:
        for d, got in simulate_failure(plan, link.id).items():
            if got < protected[d]:
                out.append(Violation(link.id, d, got, protected[d]))
    return out


def shared_tail_hops(paths: Sequence[Sequence[str]]) -> int:
    return max(_shared_suffix(paths) - 1, 0)


def greedy_groups(
    topology: Topology, demands: Sequence[RoutedDemand], pairwise_only: bool = False
) -> list[tuple[str, ...]]:
    """Heuristic grouping by longest shared protection tail.

    Repeatedly merges the two groups with the same destination whose union
    shares the longest protection tail (at least one link) and remains
    feasible. Ties go to the lexicographically smallest member lists.
    With ``pairwise_only`` only singletons are merged, into pairs.
    """
    by_id = {d.id: d for d in demands}
    working = {d.id: d.working for d in demands}
    order = {d.id: i for i, d in enumerate(demands)}
    groups: list[tuple[str, ...]] = [(d.id,) for d in demands]
    while True:
        best = None
        for i, g1 in enumerate(groups):
            for g2 in groups[i + 1:]:
                if pairwise_only and (len(g1) > 1 or len(g2) > 1):
                    continue
                members = tuple(sorted(g1 + g2, key=order.__getitem__))
                if len({by_id[d].destination for d in members}) != 1:
                    continue
                hops = shared_tail_hops([by_id[d].protection for d in members])
                if hops < 1:
                    continue
                candidate = CodingGroup.from_signals(
                    [ProtectionSignal(d, by_id[d].rate, by_id[d].protection) for d in members]
                )
                if not coding_feasible(candidate, working, topology):
                    continue
                key = (-hops, [order[d] for d in members])
                if best is None or key < best[0]:
                    best = (key, g1, g2, members)
        if best is None:
            break
        _, g1, g2, members = best
        groups = [g for g in groups if g not in (g1, g2)] + [members]
    groups.sort(key=lambda g: order[g[0]])
    return [g for g in groups if len(g) > 1]
