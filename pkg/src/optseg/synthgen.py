"""Synthetic workloads: grid road networks, random-walk routes and random
facilities, all reproducible from a seed."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .demand import Facility, RouteUsageObject, make_facility, make_route
from .netgraph import NetworkPoint, RoadNetwork, RoadSegment, Vertex

log = logging.getLogger(__name__)

# map units per simulated position fix; with ~500 fixes per route these give
# median route lengths in the proportions 1 : 2.36 : 3.78
LENGTH_CLASSES = {"short": 0.004, "medium": 0.0094, "long": 0.0151}


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    n_routes: int = 100
    points_min: int = 480
    points_max: int = 520
    step_length: float = LENGTH_CLASSES["medium"]
    n_facilities: int = 1000
    usage_max: int = 20

    def __post_init__(self):
        if not 1 <= self.points_min <= self.points_max:
            raise ValueError("need 1 <= points_min <= points_max")
        if self.n_routes < 0 or self.n_facilities < 0:
            raise ValueError("counts must be non-negative")
        if self.step_length <= 0 or self.usage_max < 1:
            raise ValueError("step_length and usage_max must be positive")

    def streams(self) -> tuple[np.random.Generator, np.random.Generator]:
        """Independent generators for routes and facilities."""
        a, b = np.random.SeedSequence(self.seed).spawn(2)
        return np.random.default_rng(a), np.random.default_rng(b)


def grid_network(rows: int, cols: int, spacing: float = 0.1, jitter: float = 0.0,
                 seed: int = 0) -> RoadNetwork:
    """A ``rows`` x ``cols`` lattice; vertices are displaced uniformly by up
    to ``jitter`` times the spacing in each coordinate."""
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise ValueError("grid needs at least two vertices")
    if not 0 <= jitter < 0.5:
        raise ValueError("jitter must be in [0, 0.5)")
    rng = np.random.default_rng(seed)
    offs = rng.uniform(-jitter, jitter, size=(rows, cols, 2)) * spacing
    verts = [Vertex(f"v{r}_{c}", c * spacing + float(offs[r, c, 0]), r * spacing + float(offs[r, c, 1]))
             for r in range(rows) for c in range(cols)]
    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((f"h{r}_{c}", f"v{r}_{c}", f"v{r}_{c + 1}"))
            if r + 1 < rows:
                edges.append((f"u{r}_{c}", f"v{r}_{c}", f"v{r + 1}_{c}"))
    return RoadNetwork(verts, edges)


class _EdgeSampler:
    """Draws network points uniformly over total network length."""

    def __init__(self, net: RoadNetwork):
        self.ids = sorted(net.edges)
        self.cum = np.cumsum([net.edges[e].length for e in self.ids])

    def draw(self, rng: np.random.Generator) -> NetworkPoint:
        k = int(np.searchsorted(self.cum, rng.random() * self.cum[-1], side="right"))
        return NetworkPoint(self.ids[min(k, len(self.ids) - 1)], float(rng.random()))


def random_walk(net: RoadNetwork, start: NetworkPoint, forward: bool, budget: float,
                rng: np.random.Generator) -> tuple[RoadSegment, float]:
    """Walk up to ``budget`` map units from ``start``; returns the walked
    segment and the distance actually covered.

    At a vertex the next edge is uniform among the incident edges the walk
    has not used yet. When there is none (a dead end, or every other road
    there was already walked) the walk stops early.
    """
    e = net.edges[start.eid]
    d = start.d
    used = {e.id}
    via: list[str] = []
    left = budget
    while True:
        target = 1.0 if forward else 0.0
        room = abs(target - d) * e.length
        if left < room:
            d = d + (left / e.length if forward else -left / e.length)
            left = 0.0
            break
        left -= room
        d = target
        v = e.dst if forward else e.src
        options = [x for x in net.adjacency[v] if x not in used]
        if not options or left <= 0:
            break
        nxt = net.edges[options[int(rng.integers(len(options)))]]
        via.append(v)
        used.add(nxt.id)
        e = nxt
        forward = nxt.src == v
        d = 0.0 if forward else 1.0
    seg = RoadSegment(start, tuple(via), NetworkPoint(e.id, d))
    return seg, budget - left


def generate_routes(net: RoadNetwork, cfg: GenConfig, rng: np.random.Generator | None = None,
                    stats: dict | None = None) -> list[RouteUsageObject]:
    """Random-walk routes. If ``stats`` is given, the planned and the
    emitted number of fixes of every walk are appended to its ``planned``
    and ``emitted`` lists."""
    if stats is not None:
        stats.setdefault("planned", [])
        stats.setdefault("emitted", [])
    if rng is None:
        rng = cfg.streams()[0]
    sampler = _EdgeSampler(net)
    routes = []
    early = 0
    for n in range(cfg.n_routes):
        start = sampler.draw(rng)
        forward = bool(rng.integers(2))
        points = int(rng.integers(cfg.points_min, cfg.points_max + 1))
        seg, walked = random_walk(net, start, forward, points * cfg.step_length, rng)
        count = int(rng.integers(1, cfg.usage_max + 1))
        usages = [int(u) for u in rng.integers(1, cfg.usage_max + 1, size=count)]
        emitted = int(walked / cfg.step_length + 1e-9) + 1
        emitted = min(emitted, points)
        if stats is not None:
            stats["planned"].append(points)
            stats["emitted"].append(emitted)
        if emitted < points:
            early += 1
        if emitted < 2:
            log.debug("route %d stopped before its second point; dropped", n)
            continue
        routes.append(make_route(net, f"r{n}", seg, usages))
    if early:
        log.info("%d of %d walks stopped early", early, cfg.n_routes)
    return routes


def route_points(ro: RouteUsageObject, step_length: float) -> int:
    """Number of simulated position fixes along a generated route."""
    return int(ro.length / step_length + 1e-9) + 1


def generate_facilities(net: RoadNetwork, cfg: GenConfig,
                        rng: np.random.Generator | None = None) -> list[Facility]:
    if rng is None:
        rng = cfg.streams()[1]
    sampler = _EdgeSampler(net)
    return [make_facility(net, f"f{n}", sampler.draw(rng)) for n in range(cfg.n_facilities)]


def generate(net: RoadNetwork, cfg: GenConfig) -> tuple[list[RouteUsageObject], list[Facility]]:
    route_rng, fac_rng = cfg.streams()
    return generate_routes(net, cfg, route_rng), generate_facilities(net, cfg, fac_rng)
