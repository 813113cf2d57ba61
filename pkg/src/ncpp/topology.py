"""Fiber topology: nodes, undirected links with a slice budget, path lookup."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from ncpp.errors import ValidationError

DEFAULT_SLICE_COUNT = 320

TOPOLOGY_KEYS = {"nodes", "links", "default_slices", "allow_disconnected", "multigraph"}
_LINK_KEYS = {"id", "a", "b", "slices"}


@dataclass(frozen=True)
class Link:
    id: str
    a: str
    b: str
    slice_count: int = DEFAULT_SLICE_COUNT

    @property
    def endpoints(self) -> frozenset[str]:
        return frozenset((self.a, self.b))

    def other(self, node: str) -> str:
        return self.b if node == self.a else self.a


@dataclass(frozen=True)
class Topology:
    """Immutable undirected fiber graph.

    ``adjacency`` maps each node to ``{neighbour: link_id}``; it is derived in
    ``__post_init__`` and must not be passed in.
    """

    nodes: tuple[str, ...]
    links: tuple[Link, ...]
    multigraph: bool = False
    adjacency: Mapping[str, Mapping[str, str]] = field(init=False, repr=False, compare=False)
    _by_id: Mapping[str, Link] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        adj: dict[str, dict[str, str]] = {n: {} for n in self.nodes}
        by_id: dict[str, Link] = {}
        for link in self.links:
            by_id[link.id] = link
            # Parallel fibers are reserved; only the first link per pair is routable.
            adj[link.a].setdefault(link.b, link.id)
            adj[link.b].setdefault(link.a, link.id)
        object.__setattr__(self, "adjacency", adj)
        object.__setattr__(self, "_by_id", by_id)

    def link(self, link_id: str) -> Link:
        try:
            return self._by_id[link_id]
        except KeyError:
            raise KeyError(f"unknown link {link_id!r}") from None

    def has_link(self, link_id: str) -> bool:
        return link_id in self._by_id

    def link_between(self, u: str, v: str) -> str | None:
        return self.adjacency.get(u, {}).get(v)

    def neighbours(self, node: str) -> list[str]:
        return sorted(self.adjacency[node])

    @property
    def connected(self) -> bool:
        if len(self.nodes) <= 1:
            return True
        seen = {self.nodes[0]}
        queue = deque(seen)
        while queue:
            u = queue.popleft()
            for v in self.adjacency[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return len(seen) == len(self.nodes)


def default_link_id(a: str, b: str) -> str:
    return a + b


def load_topology(doc: Mapping[str, Any], strict: bool = True) -> Topology:
    """Build a validated :class:`Topology` from a scenario mapping.

    Expects ``nodes`` (list of ids) and ``links`` (list of ``{a, b, slices?, id?}``).
    Link ids default to the concatenated endpoint names (``"XE"``).

    Raises:
        ValidationError: duplicate node, dangling endpoint, bad slice count,
            duplicate node pair without ``multigraph = true``, or a
            disconnected graph without ``allow_disconnected = true``.
    """
    if strict:
        _reject_unknown(doc, TOPOLOGY_KEYS, "")
    raw_nodes = doc.get("nodes")
    if not isinstance(raw_nodes, list):
        raise ValidationError("expected a list of node ids", "nodes")
    nodes: list[str] = []
    for i, n in enumerate(raw_nodes):
        if not isinstance(n, str) or not n:
            raise ValidationError(f"node id must be a non-empty string, got {n!r}", f"nodes[{i}]")
        if n in nodes:
            raise ValidationError(f"duplicate node id {n!r}", f"nodes[{i}]")
        nodes.append(n)

    default_slices = doc.get("default_slices", DEFAULT_SLICE_COUNT)
    multigraph = bool(doc.get("multigraph", False))
    raw_links = doc.get("links", [])
    if not isinstance(raw_links, list):
        raise ValidationError("expected a list of link tables", "links")

    links: list[Link] = []
    ids: set[str] = set()
    pairs: set[frozenset[str]] = set()
    for i, entry in enumerate(raw_links):
        loc = f"links[{i}]"
        if not isinstance(entry, Mapping):
            raise ValidationError("link must be a table", loc)
        if strict:
            _reject_unknown(entry, _LINK_KEYS, loc)
        a, b = entry.get("a"), entry.get("b")
        for key, end in (("a", a), ("b", b)):
            if end not in nodes:
                raise ValidationError(f"unknown node {end!r}", f"{loc}.{key}")
        if a == b:
            raise ValidationError(f"self-loop on {a!r}", loc)
        slices = entry.get("slices", default_slices)
        if isinstance(slices, bool) or not isinstance(slices, int) or slices < 1:
            raise ValidationError(f"slices must be a positive integer, got {slices!r}", f"{loc}.slices")
        pair = frozenset((a, b))
        if pair in pairs and not multigraph:
            raise ValidationError(f"second link between {a!r} and {b!r} (set multigraph = true)", loc)
        pairs.add(pair)
        link_id = str(entry.get("id", default_link_id(a, b)))
        if link_id in ids:
            raise ValidationError(f"duplicate link id {link_id!r}", f"{loc}.id")
        ids.add(link_id)
        links.append(Link(link_id, a, b, slices))

    topo = Topology(tuple(nodes), tuple(links), multigraph)
    if not topo.connected and not doc.get("allow_disconnected", False):
        raise ValidationError("topology is disconnected (set allow_disconnected = true)", "links")
    return topo


def links_on_path(t: Topology, path: Sequence[str]) -> list[str]:
    """Link ids traversed by a node sequence, in order."""
    out = []
    for u, v in zip(path, path[1:]):
        link_id = t.link_between(u, v)
        if link_id is None:
            raise ValidationError(f"no link between {u!r} and {v!r}", "path")
        out.append(link_id)
    if len(path) == 1 and path[0] not in t.adjacency:
        raise ValidationError(f"unknown node {path[0]!r}", "path")
    return out


def _reject_unknown(entry: Mapping[str, Any], allowed: set[str], loc: str):
    for key in entry:
        if key not in allowed:
            where = f"{loc}.{key}" if loc else key
            raise ValidationError("unknown key", where)
