"""Cross-references between edges, vertices, routes and facilities shared by
both query algorithms."""

from __future__ import annotations

import hashlib
import logging
import math
import pickle
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .demand import Facility, RouteUsageObject, ValidationError
from .netgraph import TOL, NetworkPoint, RoadNetwork, Trace
from .scoring import (DistributionModel, RouteProfile, ScoringFunction, profile_from_cuts,
                      project_facility, route_score, weight)

log = logging.getLogger(__name__)

CACHE_VERSION = 1


@dataclass(frozen=True)
class Coverage:
    """The part ``[lo, hi]`` of one edge covered by route ``rid``, split into
    ``(a, b, j)`` runs (edge offsets, increasing) lying in route piece ``j``."""

    rid: str
    lo: float
    hi: float
    spans: tuple[tuple[float, float, int], ...]


@dataclass
class PreprocessedIndex:
    delta: float
    edge_facilities: dict[str, tuple[str, ...]]          # e.F_c
    edge_routes: dict[str, tuple[str, ...]]              # e.R_c
    edge_endpoints: dict[str, tuple[NetworkPoint, ...]]  # e.O_c
    edge_coverage: dict[str, tuple[Coverage, ...]]
    vertex_routes: dict[str, tuple[str, ...]]            # v.R_c
    vertex_positions: dict[str, tuple[int, ...]]         # v.L
    facility_edge: dict[str, str]                        # f.e_c
    facility_routes: dict[str, tuple[str, ...]]          # f.R_c
    route_edges: dict[str, tuple[str, ...]]              # r.E_c
    route_facilities: dict[str, tuple[str, ...]]         # r.F_c
    profiles: dict[str, RouteProfile]

    def idle_facilities(self) -> list[str]:
        return sorted(f for f, rs in self.facility_routes.items() if not rs)


def _route_sources(net: RoadNetwork, tr: Trace) -> dict[str, float]:
    sources: dict[str, float] = {}
    for pc, L in zip(tr.pieces, tr.edge_lengths):
        e = net.edges[pc.eid]
        for v, d in ((e.src, pc.lo * L), (e.dst, (1.0 - pc.hi) * L)):
            if d < sources.get(v, math.inf):
                sources[v] = d
    return sources


def _distance_from_field(net: RoadNetwork, p: NetworkPoint, tr: Trace,
                         field: dict[str, float]) -> float:
    """Distance from ``p`` to the route given the route's distance field."""
    e = net.edges[p.eid]
    best = math.inf
    if e.src in field:
        best = field[e.src] + p.d * e.length
    if e.dst in field:
        best = min(best, field[e.dst] + (1.0 - p.d) * e.length)
    i = tr.by_edge.get(p.eid)
    if i is not None:
        pc = tr.pieces[i]
        best = min(best, max(0.0, pc.lo - p.d, p.d - pc.hi) * e.length)
    return best


def coverage_spans(tr: Trace, i: int, prof: RouteProfile) -> tuple[tuple[float, float, int], ...]:
    pc = tr.pieces[i]
    out = []
    for a, b, j in prof.spans(tr.offsets[i], tr.offsets[i + 1]):
        xa, xb = tr.edge_offset(i, a), tr.edge_offset(i, b)
        out.append((min(xa, xb), max(xa, xb), j))
    if pc.end < pc.start:
        out.reverse()
    # pin the outer ends to the exact piece extent
    first, last = out[0], out[-1]
    out[0] = (pc.lo, first[1], first[2])
    out[-1] = (out[-1][0], pc.hi, last[2])
    return tuple(out)


def preprocess(net: RoadNetwork, routes: Sequence[RouteUsageObject],
               facilities: Sequence[Facility], delta: float) -> PreprocessedIndex:
    if delta < 0:
        raise ValueError("delta must be non-negative")
    fac_by_id: dict[str, Facility] = {}
    for f in facilities:
        if f.fid in fac_by_id:
            raise ValidationError(f"duplicate facility id {f.fid}")
        if f.p.eid not in net.edges:
            raise ValidationError(f"facility {f.fid} references unknown edge {f.p.eid}")
        fac_by_id[f.fid] = f
    seen_routes = set()
    for ro in routes:
        if ro.rid in seen_routes:
            raise ValidationError(f"duplicate route id {ro.rid}")
        seen_routes.add(ro.rid)

    edge_fac: dict[str, list[str]] = {}
    for f in facilities:
        edge_fac.setdefault(f.p.eid, []).append(f.fid)

    edge_routes: dict[str, list[str]] = {}
    edge_ends: dict[str, list[NetworkPoint]] = {}
    edge_cov: dict[str, list[Coverage]] = {}
    vertex_routes: dict[str, list[str]] = {}
    vertex_pos: dict[str, list[int]] = {}
    fac_routes: dict[str, list[str]] = {f.fid: [] for f in facilities}
    route_edges: dict[str, tuple[str, ...]] = {}
    route_facs: dict[str, tuple[str, ...]] = {}
    profiles: dict[str, RouteProfile] = {}
    fac_fields: dict[str, dict[str, float]] = {}

    for ro in routes:
        tr = ro.trace
        field = net.dijkstra(_route_sources(net, tr), delta)
        near = set(tr.by_edge)
        for v in field:
            near.update(net.adjacency[v])
        e_c = tuple(sorted(near))
        route_edges[ro.rid] = e_c

        attracted = []
        for eid in e_c:
            edge_routes.setdefault(eid, []).append(ro.rid)
            for p in (ro.r.start, ro.r.end):
                if p.eid == eid and p.d not in (0.0, 1.0) and p not in edge_ends.get(eid, ()):
                    edge_ends.setdefault(eid, []).append(p)
            fids = edge_fac.get(eid)
            if not fids:
                continue
            i = tr.by_edge.get(eid)
            if i is not None and tr.pieces[i].lo == 0.0 and tr.pieces[i].hi == 1.0:
                attracted.extend(fids)      # route contains the whole edge
            else:
                slack = delta + TOL * max(1.0, delta)
                attracted.extend(f for f in fids
                                 if _distance_from_field(net, fac_by_id[f].p, tr, field) <= slack)

        # the facility-side projection has the final say, so borderline
        # distances resolve the same way as in ``demand.attracts``
        positions = []
        confirmed = []
        for fid in sorted(attracted):
            f = fac_by_id[fid]
            if fid not in fac_fields:
                fac_fields[fid] = net.dijkstra(net.point_sources(f.p), delta)
            c = project_facility(net, f, tr, delta, fac_fields[fid])
            if c is not None:
                positions.append(c)
                confirmed.append(fid)
                fac_routes[fid].append(ro.rid)
        route_facs[ro.rid] = tuple(confirmed)
        prof = profile_from_cuts(ro.rid, tr.length, positions)
        profiles[ro.rid] = prof

        for v, ts in tr.vertex_offsets.items():
            vertex_routes.setdefault(v, []).append(ro.rid)
            vertex_pos.setdefault(v, []).append(prof.index_at(min(ts)))
        for i, pc in enumerate(tr.pieces):
            if pc.hi - pc.lo <= TOL:
                continue
            edge_cov.setdefault(pc.eid, []).append(
                Coverage(ro.rid, pc.lo, pc.hi, coverage_spans(tr, i, prof)))

    index = PreprocessedIndex(
        delta=delta,
        edge_facilities={e: tuple(sorted(fs)) for e, fs in edge_fac.items()},
        edge_routes={e: tuple(rs) for e, rs in edge_routes.items()},
        edge_endpoints={e: tuple(sorted(ps)) for e, ps in edge_ends.items()},
        edge_coverage={e: tuple(cs) for e, cs in edge_cov.items()},
        vertex_routes={v: tuple(rs) for v, rs in vertex_routes.items()},
        vertex_positions={v: tuple(js) for v, js in vertex_pos.items()},
        facility_edge={f.fid: f.p.eid for f in facilities},
        facility_routes={f: tuple(rs) for f, rs in fac_routes.items()},
        route_edges=route_edges,
        route_facilities=route_facs,
        profiles=profiles,
    )
    idle = index.idle_facilities()
    if idle:
        log.info("%d of %d facilities attract no route", len(idle), len(facilities))
    return index


def piece_values(index: PreprocessedIndex, routes: Sequence[RouteUsageObject],
                 fn: ScoringFunction, model: DistributionModel) -> dict[str, tuple[float, ...]]:
    """Score each route hands to each of its pieces; entry ``j - 1`` is
    piece ``j``."""
    out = {}
    for ro in routes:
        k = index.profiles[ro.rid].k
        s = route_score(ro, fn)
        out[ro.rid] = tuple(weight(model, j, k) * s for j in range(1, k + 1))
    return out


# -- on-disk cache ------------------------------------------------------------

def dataset_hash(paths: Iterable[str | Path], delta: float) -> str:
    h = hashlib.sha256()
    for path in paths:
        h.update(Path(path).read_bytes())
        h.update(b"\0")
    h.update(repr(float(delta)).encode())
    h.update(f"v{CACHE_VERSION}".encode())
    return h.hexdigest()


def save_index(index: PreprocessedIndex, path: str | Path) -> None:
    with open(path, "wb") as fh:
        pickle.dump((CACHE_VERSION, index), fh, protocol=pickle.HIGHEST_PROTOCOL)


def load_index(path: str | Path) -> PreprocessedIndex:
    with open(path, "rb") as fh:
        version, index = pickle.load(fh)
    if version != CACHE_VERSION:
        raise ValueError(f"index cache {path} has version {version}, expected {CACHE_VERSION}")
    return index


def cached_preprocess(net: RoadNetwork, routes, facilities, delta: float,
                      inputs: Iterable[str | Path], cache_dir: str | Path) -> PreprocessedIndex:
    """``preprocess`` with the result stored under a hash of the input files."""
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    path = cache_dir / f"index-{dataset_hash(inputs, delta)[:24]}.pkl"
    if path.exists():
        log.debug("loading cached index %s", path)
        return load_index(path)
    index = preprocess(net, routes, facilities, delta)
    save_index(index, path)
    return index
