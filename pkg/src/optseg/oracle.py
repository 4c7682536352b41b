"""Brute-force reference answers computed straight from the definitions.

Every edge is cut at every place where the score could change, each piece
is scored at its midpoint by looping over all routes, and the best pieces
are joined into maximal segments. Nothing here is clever on purpose.
"""

from __future__ import annotations

from typing import Sequence

from .demand import Facility, RouteUsageObject, attracts
from .netgraph import TOL, NetworkPoint, RoadNetwork, assemble_segments, close
from .result import QueryResult
from .scoring import (SCORE_ALL, DistributionModel, ScoringFunction, point_score,
                      route_profile)

MAX_EDGES = 500
MAX_ROUTES = 100


class InstanceTooLarge(ValueError):
    pass


def atomic_intervals(net: RoadNetwork, routes: Sequence[RouteUsageObject],
                     facilities: Sequence[Facility], delta: float,
                     fn: ScoringFunction = SCORE_ALL,
                     model: DistributionModel = DistributionModel.EQUAL):
    """Yield ``(eid, lo, hi, score)`` for every piece between consecutive
    breakpoints of every edge."""
    profiles = {}
    for ro in routes:
        attractors = [f for f in facilities if attracts(net, f, ro, delta)]
        profiles[ro.rid] = route_profile(net, ro, attractors, delta)

    cuts: dict[str, set[float]] = {eid: {0.0, 1.0} for eid in net.edges}
    for ro in routes:
        tr = ro.trace
        for i, pc in enumerate(tr.pieces):
            cuts[pc.eid].update((pc.lo, pc.hi))
            for c in profiles[ro.rid].cuts:
                if tr.offsets[i] < c < tr.offsets[i + 1]:
                    cuts[pc.eid].add(tr.edge_offset(i, c))

    for eid in sorted(net.edges):
        ds = sorted(cuts[eid])
        for lo, hi in zip(ds, ds[1:]):
            if hi - lo <= TOL:
                continue
            mid = NetworkPoint(eid, (lo + hi) / 2)
            yield eid, lo, hi, point_score(net, mid, routes, profiles, fn, model)


def oracle_query(net: RoadNetwork, routes: Sequence[RouteUsageObject],
                 facilities: Sequence[Facility], delta: float,
                 fn: ScoringFunction = SCORE_ALL,
                 model: DistributionModel = DistributionModel.EQUAL,
                 enforce_limit: bool = True) -> QueryResult:
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if enforce_limit and (len(net.edges) > MAX_EDGES or len(routes) > MAX_ROUTES):
        raise InstanceTooLarge(
            f"oracle is limited to {MAX_EDGES} edges and {MAX_ROUTES} routes "
            f"(got {len(net.edges)} and {len(routes)})")
    atoms = list(atomic_intervals(net, routes, facilities, delta, fn, model))
    best = max((a[3] for a in atoms), default=0.0)
    if best <= TOL:
        return QueryResult(0.0, [])
    winners = [(eid, lo, hi) for eid, lo, hi, s in atoms if close(s, best)]
    return QueryResult(best, assemble_segments(net, winners))
