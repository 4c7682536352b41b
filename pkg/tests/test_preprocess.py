import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optseg.demand import ValidationError, attracts, make_facility
from optseg.netgraph import NetworkPoint as P
from optseg.preprocess import (cached_preprocess, dataset_hash, load_index, preprocess,
                               save_index)

from conftest import random_instance


@pytest.fixture
def index(toy):
    return preprocess(toy.net, toy.routes, toy.facilities, toy.delta)


def test_toy_edge_entries(index):
    assert index.edge_facilities["e23"] == ("f1",)
    assert set(index.edge_routes["e23"]) == {"r1", "r2", "r3"}
    assert [p.d for p in index.edge_endpoints["e23"]] == pytest.approx([0.1, 0.4, 0.9])
    assert {c.rid for c in index.edge_coverage["e23"]} == {"r1", "r2", "r3"}


def test_toy_route_entries(index):
    assert index.route_facilities["r1"] == ("f1",)
    assert index.route_facilities["r2"] == ("f1", "f2")
    assert index.route_facilities["r3"] == ("f3",)
    assert "e23" in index.route_edges["r1"]
    assert [index.profiles[r].k for r in ("r1", "r2", "r3")] == [2, 3, 2]


def test_toy_vertex_entries(index):
    assert set(index.vertex_routes["v2"]) == {"r2", "r3"}
    assert index.vertex_routes["v3"] == ("r2",)
    assert len(index.vertex_positions["v2"]) == len(index.vertex_routes["v2"])
    pos = dict(zip(index.vertex_routes["v2"], index.vertex_positions["v2"]))
    assert pos == {"r2": 1, "r3": 2}


def test_toy_facility_entries(index):
    assert index.facility_routes["f1"] == ("r1", "r2")
    assert index.facility_edge["f3"] == "e52"
    assert index.idle_facilities() == ["f4"]


def test_no_facilities(toy):
    idx = preprocess(toy.net, toy.routes, [], toy.delta)
    assert not idx.edge_facilities
    assert all(p.k == 1 for p in idx.profiles.values())


def test_duplicate_ids_rejected(toy):
    with pytest.raises(ValidationError):
        preprocess(toy.net, toy.routes + toy.routes[:1], toy.facilities, 0.2)
    with pytest.raises(ValidationError):
        preprocess(toy.net, toy.routes, toy.facilities + toy.facilities[:1], 0.2)
    with pytest.raises(ValueError):
        preprocess(toy.net, toy.routes, toy.facilities, -1)


def test_idempotent(toy):
    a = preprocess(toy.net, toy.routes, toy.facilities, 0.2)
    b = preprocess(toy.net, toy.routes, toy.facilities, 0.2)
    assert a == b


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_symmetric_cross_references(seed):
    inst = random_instance(seed)
    idx = preprocess(inst.net, inst.routes, inst.facilities, inst.delta)
    for rid, edges in idx.route_edges.items():
        for eid in edges:
            assert rid in idx.edge_routes[eid]
    for eid, rids in idx.edge_routes.items():
        for rid in rids:
            assert eid in idx.route_edges[rid]
    for rid, fids in idx.route_facilities.items():
        for fid in fids:
            assert rid in idx.facility_routes[fid]
    for fid, rids in idx.facility_routes.items():
        for rid in rids:
            assert fid in idx.route_facilities[rid]
    for eid, pts in idx.edge_endpoints.items():
        assert all(p.eid == eid and p.d not in (0.0, 1.0) for p in pts)
    for v, rids in idx.vertex_routes.items():
        assert len(rids) == len(idx.vertex_positions[v])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_attraction_agrees_with_direct_check(seed):
    inst = random_instance(seed)
    idx = preprocess(inst.net, inst.routes, inst.facilities, inst.delta)
    for f in inst.facilities:
        direct = {ro.rid for ro in inst.routes if attracts(inst.net, f, ro, inst.delta)}
        assert set(idx.facility_routes[f.fid]) == direct


def test_cache_round_trip(toy, tmp_path, index):
    path = tmp_path / "idx.pkl"
    save_index(index, path)
    assert load_index(path) == index


def test_cached_preprocess_reuses_file(toy, tmp_path):
    inputs = []
    for name in ("n", "f", "r"):
        p = tmp_path / name
        p.write_text(name)
        inputs.append(p)
    a = cached_preprocess(toy.net, toy.routes, toy.facilities, 0.2, inputs, tmp_path / "c")
    files = list((tmp_path / "c").iterdir())
    assert len(files) == 1
    b = cached_preprocess(toy.net, toy.routes, toy.facilities, 0.2, inputs, tmp_path / "c")
    assert a == b
    assert dataset_hash(inputs, 0.2) != dataset_hash(inputs, 0.3)
    inputs[0].write_text("changed")
    cached_preprocess(toy.net, toy.routes, toy.facilities, 0.2, inputs, tmp_path / "c")
    assert len(list((tmp_path / "c").iterdir())) == 2


def test_on_edge_facility_off_partial_route(toy):
    """A facility on r1's edge but beyond D sits on r1's virtual extension."""
    net = toy.net
    f = make_facility(net, "g", P("e23", 0.95))
    idx = preprocess(net, toy.routes[:1], [f], 0.2)
    prof = idx.profiles["r1"]
    assert prof.k == 2 and prof.cuts[0] > toy.routes[0].length
