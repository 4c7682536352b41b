"""Route scoring functions, score distribution models and point scores."""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, Mapping

from .demand import Facility, RouteUsageObject
from .netgraph import TOL, NetworkPoint, RoadNetwork, Trace


@dataclass(frozen=True)
class ScoringFunction:
    """``all`` sums every traversal; ``cap`` counts at most ``x`` per customer."""

    kind: str = "all"
    x: int | None = None

    def __post_init__(self):
        if self.kind not in ("all", "cap"):
            raise ValueError(f"unknown scoring function {self.kind!r}")
        if self.kind == "cap" and (self.x is None or self.x < 1):
            raise ValueError("cap scoring needs a positive integer x")

    @classmethod
    def parse(cls, text: str) -> ScoringFunction:
        if text == "all":
            return cls("all")
        if text.startswith("cap:"):
            return cls("cap", int(text[4:]))
        raise ValueError(f"scoring must be 'all' or 'cap:<x>', got {text!r}")

    def __str__(self) -> str:
        return "all" if self.kind == "all" else f"cap:{self.x}"


class DistributionModel(str, Enum):
    EQUAL = "equal"
    EXP_DECREASING = "expdec"
    EXP_INCREASING = "expinc"
    ENDPOINTS = "ends"
    FIRST_ONLY = "first"


SCORE_ALL = ScoringFunction("all")


def route_score(ro: RouteUsageObject, fn: ScoringFunction = SCORE_ALL) -> float:
    if fn.kind == "all":
        total = sum(ro.usages)
    else:
        total = sum(min(u, fn.x) for u in ro.usages)
    return ro.length * total


def subsegment_count(n_facilities: int, ends_occupied: int = 0) -> int:
    """Number of pieces ``n`` facilities cut a route into when
    ``ends_occupied`` of them sit on the route's end points."""
    if n_facilities < 0 or not 0 <= ends_occupied <= min(2, n_facilities):
        raise ValueError("invalid facility counts")
    if n_facilities == 0:
        return 1
    return max(1, n_facilities + 1 - ends_occupied)


@lru_cache(maxsize=65536)
def weight(model: DistributionModel, j: int, k: int) -> float:
    """Fraction of a route's score given to its ``j``-th of ``k`` pieces."""
    if not 1 <= j <= k:
        raise ValueError(f"subsegment index {j} out of range 1..{k}")
    model = DistributionModel(model)
    if model is DistributionModel.EQUAL:
        return 1.0 / k
    if model is DistributionModel.EXP_DECREASING:
        return 2.0 ** -j / (1.0 - 2.0 ** -k)
    if model is DistributionModel.EXP_INCREASING:
        return weight(DistributionModel.EXP_DECREASING, k + 1 - j, k)
    if model is DistributionModel.ENDPOINTS:
        if k == 1:
            return 1.0
        return 0.5 if j in (1, k) else 0.0
    return 1.0 if j == 1 else 0.0


@dataclass(frozen=True)
class RouteProfile:
    """Where a route's attracting facilities cut it.

    ``cuts`` are sorted offsets along the route. A facility off the route
    whose nearest route point is an end point sits on the virtual extension
    beyond that end, so its cut is negative (before the start) or greater
    than the route length (past the end); such pieces have no geometry but
    still count towards ``k``.
    """

    rid: str
    cuts: tuple[float, ...]
    k: int

    def index_at(self, t: float) -> int:
        """Piece index of route offset ``t``; a point on a cut belongs to the
        earlier piece."""
        return 1 + bisect_left(self.cuts, t - TOL)

    def spans(self, t0: float, t1: float) -> list[tuple[float, float, int]]:
        """Partition ``[t0, t1]`` into ``(a, b, j)`` runs of constant index."""
        out = []
        a = t0
        j = 1 + bisect_right(self.cuts, t0 + TOL)
        for c in self.cuts:
            if c <= t0 + TOL:
                continue
            if c >= t1 - TOL:
                break
            out.append((a, c, j))
            a, j = c, j + 1
        out.append((a, t1, j))
        return out


def project_facility(net: RoadNetwork, f: Facility, tr: Trace, delta: float,
                     dist: Mapping[str, float] | None = None) -> float | None:
    """Signed route offset where facility ``f`` cuts the route, or ``None``
    if ``f`` does not attract it."""
    d, t = net.nearest_on_trace(f.p, tr, delta, dist)
    if t is None or d > delta:
        return None
    eps = TOL * max(1.0, tr.length)
    if d > TOL:
        if t <= eps:
            return -d
        if t >= tr.length - eps:
            return tr.length + d
    return t


def profile_from_cuts(rid: str, length: float, positions: Iterable[float]) -> RouteProfile:
    eps = TOL * max(1.0, length)
    cuts: list[float] = []
    for c in sorted(positions):
        if abs(c) <= eps or abs(c - length) <= eps:
            continue
        if cuts and c - cuts[-1] <= eps:
            continue
        cuts.append(c)
    return RouteProfile(rid, tuple(cuts), len(cuts) + 1)


def route_profile(net: RoadNetwork, ro: RouteUsageObject, attractors: Iterable[Facility],
                  delta: float) -> RouteProfile:
    positions = []
    for f in attractors:
        c = project_facility(net, f, ro.trace, delta)
        if c is not None:
            positions.append(c)
    return profile_from_cuts(ro.rid, ro.length, positions)


def point_score(net: RoadNetwork, p: NetworkPoint, routes: Iterable[RouteUsageObject],
                profiles: Mapping[str, RouteProfile], fn: ScoringFunction = SCORE_ALL,
                model: DistributionModel = DistributionModel.EQUAL) -> float:
    """Score of network location ``p``: each route passing through ``p``
    contributes the share of its score assigned to the piece holding ``p``."""
    total = 0.0
    for ro in routes:
        t = ro.trace.locate_point(net, p)
        if t is None:
            continue
        prof = profiles[ro.rid]
        total += weight(model, prof.index_at(t), prof.k) * route_score(ro, fn)
    return total
