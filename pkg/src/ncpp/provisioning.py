"""Flexgrid spectrum state with first-fit, contiguous and continuous allocation."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

from ncpp.errors import SpectrumBlockedError, ValidationError
from ncpp.topology import Topology, links_on_path


@dataclass(frozen=True)
class ChannelRequest:
    owner: str
    path: tuple[str, ...]
    slice_demand: int

    def __post_init__(self):
        if self.slice_demand < 0:
            raise ValueError(f"slice_demand must be >= 0, got {self.slice_demand}")


@dataclass(frozen=True)
class Allocation:
    """Slices ``[start, stop)`` held on every link in ``links``.

    ``handle`` is unique per assignment in a given :class:`SpectrumState`;
    empty allocations (zero demand) carry ``handle = None``.
    """

    owner: str
    links: tuple[str, ...]
    start: int
    stop: int
    handle: int | None = None

    @property
    def width(self) -> int:
        return self.stop - self.start


class SpectrumState:
    """Per-link slot ownership for one topology.

    Each link holds a list of length ``slice_count`` whose entries are either
    ``None`` (free) or the handle of the allocation occupying that slice.
    Single-writer; use :meth:`copy` to branch.
    """

    def __init__(self, topology: Topology):
        self.topology = topology
        self.slots: dict[str, list[int | None]] = {
            link.id: [None] * link.slice_count for link in topology.links
        }
        self.allocations: dict[int, Allocation] = {}
        self._next_handle = 0

    def copy(self) -> SpectrumState:
        new = SpectrumState.__new__(SpectrumState)
        new.topology = self.topology
        new.slots = {l: list(v) for l, v in self.slots.items()}
        new.allocations = dict(self.allocations)
        new._next_handle = self._next_handle
        return new

    def free_windows(self, link_ids: Sequence[str], width: int) -> list[int]:
        """All starts where ``width`` slices are free on every listed link."""
        size = min(len(self.slots[l]) for l in link_ids)
        free = [all(self.slots[l][i] is None for l in link_ids) for i in range(size)]
        starts = []
        run = 0
        for i, ok in enumerate(free):
            run = run + 1 if ok else 0
            if run >= width:
                starts.append(i - width + 1)
        return starts

    def is_free(self, link_id: str) -> bool:
        return all(s is None for s in self.slots[link_id])


def first_fit_assign(state: SpectrumState, req: ChannelRequest) -> Allocation:
    """Occupy the lowest-indexed window of ``req.slice_demand`` slices free on the whole path.

    Zero-demand requests and single-node paths return an empty allocation and
    leave ``state`` untouched.

    Raises:
        SpectrumBlockedError: no common window; names the link with the
            fewest free slices.
    """
    link_ids = tuple(links_on_path(state.topology, req.path))
    n = req.slice_demand
    if n == 0 or not link_ids:
        return Allocation(req.owner, link_ids, 0, n if link_ids else 0)

    starts = state.free_windows(link_ids, n)
    if not starts:
        tightest = min(link_ids, key=lambda l: (sum(s is None for s in state.slots[l]), l))
        free = sum(s is None for s in state.slots[tightest])
        raise SpectrumBlockedError(
            f"no common window of {n} slices for {req.owner!r} on {'-'.join(req.path)}; "
            f"tightest link {tightest} has {free} free",
            tightest,
        )
    start = starts[0]
    handle = state._next_handle
    state._next_handle += 1
    for l in link_ids:
        state.slots[l][start:start + n] = [handle] * n
    alloc = Allocation(req.owner, link_ids, start, start + n, handle)
    state.allocations[handle] = alloc
    return alloc


def release(state: SpectrumState, alloc: Allocation) -> SpectrumState:
    if alloc.handle is None:
        return state
    if state.allocations.get(alloc.handle) != alloc:
        raise ValidationError(f"allocation {alloc.handle} for {alloc.owner!r} is not held")
    for l in alloc.links:
        state.slots[l][alloc.start:alloc.stop] = [None] * alloc.width
    del state.allocations[alloc.handle]
    return state


def link_usage(state: SpectrumState, link_id: str) -> int:
    return sum(s is not None for s in state.slots[link_id])


def usage_csv(state: SpectrumState) -> str:
    """``link_id,occupied,total`` for every link, in topology order."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["link_id", "occupied", "total"])
    for link in state.topology.links:
        writer.writerow([link.id, link_usage(state, link.id), link.slice_count])
    return buf.getvalue()
