"""Min-hop routing and link-disjoint working/protection path pairs."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from ncpp.errors import NoDisjointPairError, NoPathError, ValidationError
from ncpp.topology import Topology, links_on_path

Path = tuple[str, ...]


@dataclass(frozen=True)
class PathPair:
    working: Path
    protection: Path

    @property
    def hops(self) -> int:
        return len(self.working) + len(self.protection) - 2


def _check_nodes(t: Topology, *nodes: str):
    for n in nodes:
        if n not in t.adjacency:
            raise ValidationError(f"unknown node {n!r}")


def shortest_path(t: Topology, s: str, d: str) -> Path:
    """Minimum-hop path from ``s`` to ``d``.

    Among equal-length paths the lexicographically smallest node sequence
    wins: BFS distances are taken from ``d`` and the walk from ``s`` always
    steps to the smallest neighbour one hop closer.
    """
    _check_nodes(t, s, d)
    dist = {d: 0}
    queue = deque([d])
    while queue:
        u = queue.popleft()
        for v in t.adjacency[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    if s not in dist:
        raise NoPathError(f"{d!r} is unreachable from {s!r}")
    path = [s]
    while path[-1] != d:
        u = path[-1]
        path.append(min(v for v in t.adjacency[u] if dist.get(v) == dist[u] - 1))
    return tuple(path)


def _bellman_ford(arcs: dict[tuple[str, str], int], nodes: list[str], s: str) -> dict[str, str]:
    dist: dict[str, int] = {s: 0}
    pred: dict[str, str] = {}
    ordered = sorted(arcs.items())
    for _ in range(len(nodes) - 1):
        changed = False
        for (u, v), w in ordered:
            if u in dist and dist[u] + w < dist.get(v, float("inf")):
                dist[v] = dist[u] + w
                pred[v] = u
                changed = True
        if not changed:
            break
    return pred


def disjoint_pair(t: Topology, s: str, d: str) -> PathPair:
    """Two link-disjoint ``s -> d`` paths with minimum total hop count.

    Bhandari's form of Suurballe's algorithm: route once, reverse the used
    arcs with negated weight, route again with Bellman-Ford, then cancel the
    arcs traversed in both directions and split what remains into two paths.
    The shorter path is the working one (ties: lexicographic).

    Raises:
        NoPathError: ``d`` unreachable from ``s``.
        NoDisjointPairError: reachable, but every pair shares a link.
    """
    if s == d:
        raise ValidationError(f"source and destination are both {s!r}")
    first = shortest_path(t, s, d)

    arcs: dict[tuple[str, str], int] = {}
    for link in t.links:
        if t.link_between(link.a, link.b) == link.id:
            arcs[(link.a, link.b)] = 1
            arcs[(link.b, link.a)] = 1
    for u, v in zip(first, first[1:]):
        del arcs[(u, v)]
        arcs[(v, u)] = -1

    pred = _bellman_ford(arcs, list(t.nodes), s)
    if d not in pred:
        raise NoDisjointPairError(f"no link-disjoint path pair between {s!r} and {d!r}")
    second = [d]
    while second[-1] != s:
        second.append(pred[second[-1]])
    second.reverse()

    used = set(zip(first, first[1:]))
    for u, v in zip(second, second[1:]):
        if (v, u) in used:
            used.discard((v, u))
        else:
            used.add((u, v))

    out: dict[str, list[str]] = {}
    for u, v in sorted(used):
        out.setdefault(u, []).append(v)
    paths = []
    for _ in range(2):
        walk = [s]
        while walk[-1] != d:
            walk.append(out[walk[-1]].pop(0))
        paths.append(tuple(walk))
    paths.sort(key=lambda p: (len(p), p))
    return PathPair(paths[0], paths[1])


def verify_disjoint(p: PathPair, t: Topology) -> bool:
    return not set(links_on_path(t, p.working)) & set(links_on_path(t, p.protection))
