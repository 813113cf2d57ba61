"""Scenario documents: TOML in, validated :class:`Scenario` out."""

from __future__ import annotations

import random
import sys
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ncpp.errors import ValidationError
from ncpp.optimizer import CODED_LINK, OBJECTIVES
from ncpp.slices import GridSpec, ModulationFormat, as_rate, modulation
from ncpp.topology import TOPOLOGY_KEYS, Topology, links_on_path, load_topology

SHIPPED = ("fig1", "fig3", "fig5")

_SCENARIO_KEYS = {
    "name", "description", "modulation", "slice_width", "overhead", "step", "objective",
    "targets", "pairwise_only", "strict_grid", "round", "coding_groups", "demands",
}
_DEMAND_KEYS = {"id", "src", "dst", "rate", "working", "protection", "min_protected"}

DEFAULT_TARGETS = tuple(Decimal(t) / 10 for t in range(10, 0, -1))


@dataclass(frozen=True)
class Demand:
    id: str
    src: str
    dst: str
    rate: Decimal
    working: tuple[str, ...] | None = None
    protection: tuple[str, ...] | None = None
    min_protected: Decimal = Decimal(0)


@dataclass(frozen=True)
class Scenario:
    name: str
    topology: Topology
    grid: GridSpec
    modulation: ModulationFormat
    demands: tuple[Demand, ...]
    coding_groups: tuple[tuple[str, ...], ...] | None = None
    targets: tuple[Decimal, ...] = DEFAULT_TARGETS
    step: Decimal = Decimal(25)
    objective: str = CODED_LINK
    pairwise_only: bool = False
    round_nearest: bool = False
    description: str = ""


def _decimal(value: Any, loc: str) -> Decimal:
    if isinstance(value, bool) or not isinstance(value, (int, float, str, Decimal)):
        raise ValidationError(f"expected a number, got {value!r}", loc)
    try:
        return as_rate(value)
    except InvalidOperation:
        raise ValidationError(f"expected a number, got {value!r}", loc) from None


def _path(value: Any, loc: str, t: Topology) -> tuple[str, ...]:
    if not isinstance(value, list) or not value or not all(isinstance(n, str) for n in value):
        raise ValidationError("expected a non-empty list of node ids", loc)
    if len(set(value)) != len(value):
        raise ValidationError("path repeats a node", loc)
    try:
        links_on_path(t, value)
    except ValidationError as exc:
        raise ValidationError(str(exc).removeprefix("path: "), loc) from None
    return tuple(value)


def parse_scenario(doc: Mapping[str, Any], name: str = "scenario") -> Scenario:
    """Validate a scenario mapping (as loaded from TOML).

    Unknown keys are rejected. Errors carry the key path of the offending
    entry, e.g. ``demands[1].rate``.
    """
    for key in doc:
        if key not in _SCENARIO_KEYS and key not in TOPOLOGY_KEYS:
            raise ValidationError("unknown key", key)
    topo = load_topology({k: v for k, v in doc.items() if k in TOPOLOGY_KEYS})

    grid = GridSpec(
        _decimal(doc.get("slice_width", "6.25"), "slice_width"),
        _decimal(doc.get("overhead", 1), "overhead"),
    )
    try:
        fmt = modulation(str(doc.get("modulation", "qpsk-pm")))
    except ValueError as exc:
        raise ValidationError(str(exc), "modulation") from None
    step = _decimal(doc.get("step", 25), "step")
    if step <= 0:
        raise ValidationError("step must be positive", "step")
    objective = doc.get("objective", CODED_LINK)
    if objective not in OBJECTIVES:
        raise ValidationError(f"objective must be one of {OBJECTIVES}", "objective")
    rounding = doc.get("round", "exact")
    if rounding not in ("exact", "nearest"):
        raise ValidationError("round must be 'exact' or 'nearest'", "round")
    strict_grid = bool(doc.get("strict_grid", True))

    raw_targets = doc.get("targets", list(DEFAULT_TARGETS))
    if not isinstance(raw_targets, list) or not raw_targets:
        raise ValidationError("expected a non-empty list of fractions", "targets")
    targets = tuple(_decimal(t, f"targets[{i}]") for i, t in enumerate(raw_targets))
    for i, t in enumerate(targets):
        if not 0 <= t <= 1:
            raise ValidationError(f"target {t} outside [0, 1]", f"targets[{i}]")

    raw_demands = doc.get("demands", [])
    if not isinstance(raw_demands, list) or not raw_demands:
        raise ValidationError("no demands", "demands")
    demands: list[Demand] = []
    for i, entry in enumerate(raw_demands):
        loc = f"demands[{i}]"
        if not isinstance(entry, Mapping):
            raise ValidationError("demand must be a table", loc)
        for key in entry:
            if key not in _DEMAND_KEYS:
                raise ValidationError("unknown key", f"{loc}.{key}")
        did = entry.get("id", f"d{i + 1}")
        if not isinstance(did, str) or any(d.id == did for d in demands):
            raise ValidationError(f"demand id {did!r} missing or duplicated", f"{loc}.id")
        src, dst = entry.get("src"), entry.get("dst")
        for key, node in (("src", src), ("dst", dst)):
            if node not in topo.adjacency:
                raise ValidationError(f"unknown node {node!r}", f"{loc}.{key}")
        if src == dst:
            raise ValidationError("source equals destination", loc)
        rate = _decimal(entry.get("rate"), f"{loc}.rate")
        if rate <= 0:
            raise ValidationError("rate must be positive", f"{loc}.rate")
        if strict_grid and Fraction(rate) % Fraction(step):
            raise ValidationError(f"rate {rate} of demand {did!r} is not a multiple of step {step}", f"{loc}.rate")
        min_protected = _decimal(entry.get("min_protected", 0), f"{loc}.min_protected")
        if not 0 <= min_protected <= rate:
            raise ValidationError("min_protected must lie in [0, rate]", f"{loc}.min_protected")

        working = protection = None
        if ("working" in entry) != ("protection" in entry):
            raise ValidationError("give both working and protection paths, or neither", loc)
        if "working" in entry:
            working = _path(entry["working"], f"{loc}.working", topo)
            protection = _path(entry["protection"], f"{loc}.protection", topo)
            for key, p in (("working", working), ("protection", protection)):
                if (p[0], p[-1]) != (src, dst):
                    raise ValidationError(f"path must run from {src} to {dst}", f"{loc}.{key}")
            if set(links_on_path(topo, working)) & set(links_on_path(topo, protection)):
                raise ValidationError("working and protection paths share a link", loc)
        demands.append(Demand(did, src, dst, rate, working, protection, min_protected))

    groups = None
    if "coding_groups" in doc:
        raw_groups = doc["coding_groups"]
        if not isinstance(raw_groups, list):
            raise ValidationError("expected a list of demand-id lists", "coding_groups")
        ids = {d.id for d in demands}
        seen: set[str] = set()
        parsed = []
        for i, members in enumerate(raw_groups):
            loc = f"coding_groups[{i}]"
            if not isinstance(members, list) or not members:
                raise ValidationError("expected a non-empty list of demand ids", loc)
            for d in members:
                if d not in ids:
                    raise ValidationError(f"unknown demand {d!r}", loc)
                if d in seen:
                    raise ValidationError(f"demand {d!r} already grouped", loc)
                seen.add(d)
            if len({next(x.dst for x in demands if x.id == d) for d in members}) != 1:
                raise ValidationError("members must share a destination", loc)
            parsed.append(tuple(members))
        groups = tuple(parsed)

    return Scenario(
        name=str(doc.get("name", name)),
        topology=topo,
        grid=grid,
        modulation=fmt,
        demands=tuple(demands),
        coding_groups=groups,
        targets=targets,
        step=step,
        objective=objective,
        pairwise_only=bool(doc.get("pairwise_only", False)),
        round_nearest=rounding == "nearest",
        description=str(doc.get("description", "")),
    )


def parse_scenario_text(text: str, name: str = "scenario") -> Scenario:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"TOML syntax: {exc}", name) from None
    return parse_scenario(doc, name)


def shipped_text(name: str) -> str:
    return resources.files("ncpp.scenarios").joinpath(f"{name}.toml").read_text(encoding="utf-8")


def load_scenario(source: str | Path) -> Scenario:
    """Load a scenario file, or a shipped scenario by name (``fig1``, ``fig3``, ``fig5``)."""
    path = Path(source)
    if path.is_file():
        return parse_scenario_text(path.read_text(encoding="utf-8"), path.stem)
    if str(source) in SHIPPED:
        return parse_scenario_text(shipped_text(str(source)), str(source))
    raise ValidationError(f"no such scenario file, and not one of {SHIPPED}", str(source))


def random_scenario(seed: int, n_nodes: int = 8, n_demands: int | None = None) -> dict[str, Any]:
    """Seeded random scenario document: a ring plus chords, demands toward one sink.

    The ring keeps every node pair two-edge-connected. Demand rates are
    multiples of 25 Gb/s whose sum is a multiple of 250 Gb/s, so every 10 %
    target from 100 % down to 10 % is attainable on the 25 Gb/s grid.
    """
    rng = random.Random(seed)
    nodes = [f"N{i}" for i in range(n_nodes)]
    pairs = {frozenset((nodes[i], nodes[(i + 1) % n_nodes])) for i in range(n_nodes)}
    for _ in range(rng.randint(1, n_nodes)):
        a, b = rng.sample(nodes, 2)
        pairs.add(frozenset((a, b)))
    links = [{"a": a, "b": b} for a, b in sorted(tuple(sorted(p)) for p in pairs)]

    sink = rng.choice(nodes)
    k = n_demands or rng.randint(2, 4)
    sources = rng.sample([n for n in nodes if n != sink], k)
    units = [rng.randint(1, 16) for _ in range(k - 1)]
    last = [u for u in range(1, 17) if (sum(units) + u) % 10 == 0]
    units.append(rng.choice(last))
    demands = [
        {"id": f"d{i + 1}", "src": s, "dst": sink, "rate": 25 * u}
        for i, (s, u) in enumerate(zip(sources, units))
    ]
    return {
        "name": f"random-{seed}",
        "modulation": "qpsk-pm",
        "step": 25,
        "nodes": nodes,
        "links": links,
        "demands": demands,
    }
