"""Query by graph augmentation.

Facility points and route end points are inserted into their edges as new
vertices. Each vertex carries an attraction list: the routes passing
through it. A refined edge is scored from the routes found in the lists of
both of its end vertices that also run along the edge itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .demand import Facility, RouteUsageObject
from .netgraph import TOL, RoadNetwork, assemble_segments, close
from .preprocess import PreprocessedIndex, piece_values, preprocess
from .result import QueryResult
from .scoring import SCORE_ALL, DistributionModel, ScoringFunction


@dataclass(frozen=True)
class AugEdge:
    eid: str        # originating edge
    lo: float       # offset range on the originating edge
    hi: float


@dataclass
class AugmentedGraph:
    points: dict[str, tuple[float, ...]]     # inserted offsets per original edge
    edges: list[AugEdge]

    def pieces_of(self, eid: str) -> list[AugEdge]:
        return [a for a in self.edges if a.eid == eid]


def _merge(ds: list[float]) -> tuple[float, ...]:
    out = [0.0]
    for d in sorted(ds):
        if d - out[-1] > TOL:
            out.append(d)
    if 1.0 - out[-1] <= TOL:
        out.pop()
    out.append(1.0)
    return tuple(out)


def augment(net: RoadNetwork, index: PreprocessedIndex,
            facilities: Sequence[Facility] = ()) -> AugmentedGraph:
    """Split every edge at its attracting facilities and route end points;
    points closer than the tolerance collapse into one vertex."""
    fac_d = {f.fid: f.p.d for f in facilities}
    points = {}
    edges = []
    for eid in sorted(net.edges):
        ds = [fac_d[f] for f in index.edge_facilities.get(eid, ())
              if f in fac_d and index.facility_routes.get(f)]
        ds.extend(p.d for p in index.edge_endpoints.get(eid, ()))
        cut = _merge(ds)
        points[eid] = cut[1:-1]
        edges.extend(AugEdge(eid, a, b) for a, b in zip(cut, cut[1:]))
    return AugmentedGraph(points, edges)


def score_edges(net: RoadNetwork, routes: Sequence[RouteUsageObject], index: PreprocessedIndex,
                graph: AugmentedGraph, values: dict[str, tuple[float, ...]]
                ) -> list[tuple[AugEdge, float]]:
    """Score every refined edge that some route runs along."""
    by_id = {ro.rid: ro for ro in routes}
    vertex_al = {v: set(rs) for v, rs in index.vertex_routes.items()}
    out = []
    for eid in sorted(index.edge_coverage):
        e = net.edges[eid]
        cut = (0.0, *graph.points[eid], 1.0)
        # attraction lists of this edge's vertices, original and inserted
        lists = [vertex_al.get(e.src, set())]
        for d in cut[1:-1]:
            lists.append({rid for rid in index.edge_routes.get(eid, ())
                          if by_id[rid].trace.locate(eid, d) is not None})
        lists.append(vertex_al.get(e.dst, set()))

        for n, (a, b) in enumerate(zip(cut, cut[1:])):
            score = 0.0
            for rid in lists[n] & lists[n + 1]:
                tr = by_id[rid].trace
                i = tr.by_edge.get(eid)
                if i is None:
                    continue
                pc = tr.pieces[i]
                if pc.lo > a + TOL or pc.hi < b - TOL:
                    continue
                t = tr.offset_at(i, (a + b) / 2)
                score += values[rid][index.profiles[rid].index_at(t) - 1]
            out.append((AugEdge(eid, a, b), score))
    return out


def aug_query(net: RoadNetwork, routes: Sequence[RouteUsageObject],
              facilities: Sequence[Facility], delta: float,
              fn: ScoringFunction = SCORE_ALL,
              model: DistributionModel = DistributionModel.EQUAL,
              index: PreprocessedIndex | None = None) -> QueryResult:
    if index is None:
        index = preprocess(net, routes, facilities, delta)
    if not routes:
        return QueryResult(0.0, [])
    values = piece_values(index, routes, fn, model)
    graph = augment(net, index, facilities)
    scored = score_edges(net, routes, index, graph, values)
    best = max((s for _, s in scored), default=0.0)
    if best <= TOL:
        return QueryResult(0.0, [])
    winners = [(a.eid, a.lo, a.hi) for a, s in scored if close(s, best)]
    return QueryResult(best, assemble_segments(net, winners))
