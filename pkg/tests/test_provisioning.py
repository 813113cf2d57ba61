import random

import pytest

from ncpp.errors import SpectrumBlockedError, ValidationError
from ncpp.provisioning import ChannelRequest, SpectrumState, first_fit_assign, link_usage, release, usage_csv
from ncpp.topology import links_on_path, load_topology
from oracles import OwnershipModel

FIG1 = load_topology(
    {
        "nodes": ["A", "B", "X", "E", "Z"],
        "links": [
            {"a": "A", "b": "X"},
            {"a": "B", "b": "X"},
            {"a": "X", "b": "E"},
            {"a": "E", "b": "Z"},
            {"a": "A", "b": "Z"},
            {"a": "B", "b": "Z"},
        ],
    }
)


def test_empty_grid_first_fit():
    state = SpectrumState(FIG1)
    alloc = first_fit_assign(state, ChannelRequest("c", ("X", "E", "Z"), 3))
    assert (alloc.start, alloc.stop) == (0, 3)
    assert alloc.links == ("XE", "EZ")
    assert link_usage(state, "XE") == link_usage(state, "EZ") == 3


def test_skips_window_blocked_on_one_link():
    state = SpectrumState(FIG1)
    first_fit_assign(state, ChannelRequest("x", ("X", "E"), 2))
    alloc = first_fit_assign(state, ChannelRequest("c", ("X", "E", "Z"), 2))
    assert (alloc.start, alloc.stop) == (2, 4)
    model = OwnershipModel({l.id: l.slice_count for l in FIG1.links})
    model.take("x", ["XE"], 0, 2)
    assert model.first_fit(["XE", "EZ"], 2) == 2


def test_zero_demand_is_a_no_op():
    state = SpectrumState(FIG1)
    alloc = first_fit_assign(state, ChannelRequest("c", ("X", "E", "Z"), 0))
    assert alloc.width == 0 and alloc.handle is None
    assert state.allocations == {}
    assert all(link_usage(state, l.id) == 0 for l in FIG1.links)


def test_assign_release_roundtrip():
    state = SpectrumState(FIG1)
    req = ChannelRequest("c", ("A", "X", "E"), 4)
    alloc = first_fit_assign(state, req)
    release(state, alloc)
    assert all(state.is_free(l.id) for l in FIG1.links)
    again = first_fit_assign(state, req)
    assert (again.start, again.stop, again.links) == (alloc.start, alloc.stop, alloc.links)
    release(state, again)
    with pytest.raises(ValidationError):
        release(state, again)


def test_blocking_names_tightest_link():
    small = load_topology({"nodes": ["A", "B", "C"], "links": [{"a": "A", "b": "B", "slices": 4}, {"a": "B", "b": "C", "slices": 8}]})
    state = SpectrumState(small)
    first_fit_assign(state, ChannelRequest("a", ("A", "B"), 3))
    with pytest.raises(SpectrumBlockedError) as err:
        first_fit_assign(state, ChannelRequest("b", ("A", "B", "C"), 2))
    assert err.value.tightest_link == "AB"


def test_usage_csv():
    state = SpectrumState(FIG1)
    first_fit_assign(state, ChannelRequest("c", ("X", "E", "Z"), 2))
    lines = usage_csv(state).splitlines()
    assert lines[0] == "link_id,occupied,total"
    assert "XE,2,320" in lines and "AX,0,320" in lines


def test_copy_is_independent():
    state = SpectrumState(FIG1)
    branch = state.copy()
    first_fit_assign(branch, ChannelRequest("c", ("X", "E"), 2))
    assert link_usage(state, "XE") == 0 and link_usage(branch, "XE") == 2


RING = load_topology(
    {
        "nodes": ["A", "B", "C", "D", "E"],
        "links": [{"a": a, "b": b, "slices": 12} for a, b in ["AB", "BC", "CD", "DE", "EA", "AC"]],
    }
)
PATHS = [("A", "B"), ("A", "B", "C"), ("A", "C", "D"), ("B", "C", "D", "E"), ("E", "A"), ("D", "E", "A", "B"), ("C",)]


def run_sequence(seed):
    """Random assign/release sequence checked step by step against the ownership model."""
    rng = random.Random(seed)
    state = SpectrumState(RING)
    model = OwnershipModel({l.id: l.slice_count for l in RING.links})
    held = []
    for step in range(40):
        if held and rng.random() < 0.4:
            alloc = held.pop(rng.randrange(len(held)))
            release(state, alloc)
            model.free(alloc.handle)
        else:
            path = rng.choice(PATHS)
            n = rng.randint(0, 5)
            links = links_on_path(RING, path)
            expected = model.first_fit(links, n)
            try:
                alloc = first_fit_assign(state, ChannelRequest(f"c{step}", path, n))
            except SpectrumBlockedError:
                assert expected == -1
                continue
            if expected is None:
                assert alloc.handle is None
                continue
            assert alloc.start == expected
            assert alloc.width == n
            assert alloc.links == tuple(links)
            model.take(alloc.handle, links, alloc.start, n)
            held.append(alloc)
        for link in RING.links:
            ours = {(link.id, i): h for i, h in enumerate(state.slots[link.id]) if h is not None}
            theirs = {k: v for k, v in model.owner.items() if k[0] == link.id}
            assert ours == theirs
            assert link_usage(state, link.id) == sum(a.width for a in state.allocations.values() if link.id in a.links)


@pytest.mark.parametrize("seed", range(25))
def test_random_sequences_match_ownership_model(seed):
    run_sequence(seed)
