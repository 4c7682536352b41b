"""Facilities, route usage objects and the attraction relation."""

from __future__ import annotations

from dataclasses import dataclass, field

from .netgraph import TOL, NetworkPoint, RoadNetwork, RoadSegment, Trace


class ValidationError(ValueError):
    pass


@dataclass(frozen=True)
class Facility:
    fid: str
    p: NetworkPoint

    @property
    def e_c(self) -> str:
        return self.p.eid


@dataclass(frozen=True)
class RouteUsageObject:
    """A route traversed by ``count`` customers, customer ``i`` having
    taken it ``usages[i]`` times. ``trace`` is the route resolved against
    the network it was built for."""

    rid: str
    r: RoadSegment
    count: int
    usages: tuple[int, ...]
    trace: Trace = field(compare=False, repr=False)

    @property
    def length(self) -> float:
        return self.trace.length


def make_facility(net: RoadNetwork, fid: str, p: NetworkPoint) -> Facility:
    try:
        return Facility(fid, net.check_point(p))
    except ValueError as exc:
        raise ValidationError(f"facility {fid}: {exc}") from None


def make_route(net: RoadNetwork, rid: str, r: RoadSegment, usages) -> RouteUsageObject:
    """Validate and build a route usage object; ``count`` is ``len(usages)``."""
    usages = tuple(usages)
    if not usages:
        raise ValidationError(f"route {rid}: count must be positive")
    if any(int(u) != u or u < 1 for u in usages):
        raise ValidationError(f"route {rid}: usages must be positive integers")
    r = RoadSegment(net.check_point(r.start), r.via, net.check_point(r.end))
    try:
        tr = net.trace(r)
    except ValueError as exc:
        raise ValidationError(f"route {rid}: {exc}") from None
    if tr.length <= TOL:
        raise ValidationError(f"route {rid}: zero length")
    return RouteUsageObject(rid, r, len(usages), tuple(int(u) for u in usages), tr)


def attracts(net: RoadNetwork, f: Facility, ro: RouteUsageObject, delta: float) -> bool:
    """True iff the network distance from ``f`` to the route is at most ``delta``."""
    if delta < 0:
        raise ValueError("delta must be non-negative")
    dist, _ = net.nearest_on_trace(f.p, ro.trace, delta)
    return dist <= delta


def route_equivalent(ro1: RouteUsageObject, ro2: RouteUsageObject) -> bool:
    """Same route geometry, in the same direction; counts are ignored."""
    a, b = ro1.r, ro2.r
    return (a.via == b.via and a.start.eid == b.start.eid and a.end.eid == b.end.eid
            and abs(a.start.d - b.start.d) <= TOL and abs(a.end.d - b.end.d) <= TOL)
