import random

import pytest

from optseg.aug import augment, aug_query, score_edges
from optseg.netgraph import NetworkPoint as P
from optseg.netgraph import RoadNetwork, RoadSegment, Vertex, segments_match
from optseg.demand import make_route
from optseg.oracle import oracle_query
from optseg.preprocess import piece_values, preprocess
from optseg.result import results_match
from optseg.scoring import point_score, route_score

from conftest import random_instance


def test_toy_augmented_edges(toy):
    idx = preprocess(toy.net, toy.routes, toy.facilities, toy.delta)
    g = augment(toy.net, idx, toy.facilities)
    # v2-A, A-H, H-f1, f1-D, D-v3
    assert g.points["e23"] == pytest.approx((0.1, 0.4, 0.5, 0.9))
    assert len(g.pieces_of("e23")) == 5
    # f4 attracts nothing and is left out
    assert g.points["e16"] == ()


def test_nothing_to_insert_keeps_graph(toy):
    idx = preprocess(toy.net, [], [], 0.2)
    g = augment(toy.net, idx, [])
    assert all(pts == () for pts in g.points.values())
    assert len(g.edges) == len(toy.net.edges)


def test_toy_edge_scores(toy):
    res = aug_query(toy.net, toy.routes, toy.facilities, toy.delta)
    assert res.score == pytest.approx(11)
    assert len(res.segments) == 1
    assert segments_match(res.segments[0], RoadSegment(P("e23", 0.1), (), P("e23", 0.4)))
    idx = preprocess(toy.net, toy.routes, toy.facilities, toy.delta)
    # the v2-A piece scores 4 + 3 = 7
    assert point_score(toy.net, P("e23", 0.05), toy.routes, idx.profiles) == pytest.approx(7)


def test_empty_routes(toy):
    res = aug_query(toy.net, [], toy.facilities, 0.2)
    assert res.score == 0 and res.segments == []


def test_single_route_without_facilities():
    verts = [Vertex(f"v{i}", float(i), 0.0) for i in range(4)]
    net = RoadNetwork(verts, [(f"e{i}", f"v{i}", f"v{i + 1}") for i in range(3)])
    ro = make_route(net, "r", RoadSegment(P("e0", 0.5), ("v1", "v2"), P("e2", 0.5)), [3])
    res = aug_query(net, [ro], [], 0.1)
    assert res.score == pytest.approx(route_score(ro))
    assert len(res.segments) == 1 and segments_match(res.segments[0], ro.r)


@pytest.mark.parametrize("seed", range(0, 40))
def test_lengths_conserved(seed):
    inst = random_instance(seed)
    idx = preprocess(inst.net, inst.routes, inst.facilities, inst.delta)
    g = augment(inst.net, idx, inst.facilities)
    for eid, e in inst.net.edges.items():
        total = sum((a.hi - a.lo) * e.length for a in g.pieces_of(eid))
        assert total == pytest.approx(e.length, abs=1e-9)


@pytest.mark.parametrize("seed", range(300, 350))
def test_matches_oracle(seed):
    inst = random_instance(seed)
    args = (inst.net, inst.routes, inst.facilities, inst.delta, inst.fn, inst.model)
    assert results_match(aug_query(*args), oracle_query(*args))


@pytest.mark.parametrize("seed", range(400, 430))
def test_results_are_uniformly_optimal(seed):
    inst = random_instance(seed)
    res = aug_query(inst.net, inst.routes, inst.facilities, inst.delta, inst.fn, inst.model)
    idx = preprocess(inst.net, inst.routes, inst.facilities, inst.delta)
    rnd = random.Random(seed)
    for seg in res.segments:
        tr = inst.net.trace(seg)
        for _ in range(10):
            p = tr.point_at(rnd.uniform(0.001, 0.999) * tr.length)
            s = point_score(inst.net, p, inst.routes, idx.profiles, inst.fn, inst.model)
            assert s == pytest.approx(res.score, rel=1e-9)


@pytest.mark.parametrize("seed", range(500, 520))
def test_piece_score_is_midpoint_score(seed):
    inst = random_instance(seed)
    idx = preprocess(inst.net, inst.routes, inst.facilities, inst.delta)
    g = augment(inst.net, idx, inst.facilities)
    values = piece_values(idx, inst.routes, inst.fn, inst.model)
    for a, got in score_edges(inst.net, inst.routes, idx, g, values):
        mid = P(a.eid, (a.lo + a.hi) / 2)
        want = point_score(inst.net, mid, inst.routes, idx.profiles, inst.fn, inst.model)
        assert got == pytest.approx(want, rel=1e-9, abs=1e-12)
