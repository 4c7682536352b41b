"""Spatially embedded road network, network points, road segments and
network distances.

Edges are stored with a direction (``src`` -> ``dst``) because a network
point's offset is measured from ``src``, but every distance and coverage
computation treats the graph as undirected.
"""

from __future__ import annotations

import heapq
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

TOL = 1e-9


class NetworkError(ValueError):
    """Unknown vertex/edge reference or a structurally invalid segment."""


def snap(d: float) -> float:
    if abs(d) <= TOL:
        return 0.0
    if abs(1.0 - d) <= TOL:
        return 1.0
    return d


def close(a: float, b: float, tol: float = TOL) -> bool:
    """Equality with a tolerance relative to the magnitude of the operands."""
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


@dataclass(frozen=True)
class Vertex:
    id: str
    x: float
    y: float


@dataclass(frozen=True)
class Edge:
    id: str
    src: str
    dst: str
    length: float

    def other(self, vid: str) -> str:
        return self.dst if vid == self.src else self.src

    def offset_of(self, vid: str) -> float:
        """Offset of endpoint ``vid`` on this edge (0 at src, 1 at dst)."""
        if vid == self.src:
            return 0.0
        if vid == self.dst:
            return 1.0
        raise NetworkError(f"vertex {vid} is not an endpoint of edge {self.id}")

    def vertex_at(self, d: float) -> str | None:
        d = snap(d)
        if d == 0.0:
            return self.src
        if d == 1.0:
            return self.dst
        return None


@dataclass(frozen=True, order=True)
class NetworkPoint:
    eid: str
    d: float

    def snapped(self) -> NetworkPoint:
        return NetworkPoint(self.eid, snap(self.d))

    def __str__(self) -> str:
        return f"{self.eid}:{self.d:.9g}"


@dataclass(frozen=True)
class RoadSegment:
    """A polyline ``<start, v_2, ..., v_{n-1}, end>``.

    ``start`` and ``end`` are network points; ``via`` holds the ids of the
    interior vertices. With an empty ``via`` both ends lie on one edge.
    """

    start: NetworkPoint
    via: tuple[str, ...]
    end: NetworkPoint

    @property
    def points(self) -> tuple:
        return (self.start, *self.via, self.end)

    def reversed(self) -> RoadSegment:
        return RoadSegment(self.end, tuple(reversed(self.via)), self.start)

    def key(self) -> tuple:
        return (self.start.eid, round(self.start.d, 9), self.via,
                self.end.eid, round(self.end.d, 9))

    def canonical(self) -> RoadSegment:
        rev = self.reversed()
        return rev if rev.key() < self.key() else self

    def __str__(self) -> str:
        return " ".join([str(self.start), *self.via, str(self.end)])


def segments_match(a: RoadSegment, b: RoadSegment, tol: float = 1e-7) -> bool:
    """Structural equality with tolerance on the end offsets."""
    return (a.via == b.via
            and a.start.eid == b.start.eid and a.end.eid == b.end.eid
            and abs(a.start.d - b.start.d) <= tol
            and abs(a.end.d - b.end.d) <= tol)


@dataclass(frozen=True)
class Piece:
    """The part of one edge traversed by a segment, from ``start`` to ``end``
    (edge offsets; ``start > end`` means travel against the edge direction)."""

    eid: str
    start: float
    end: float

    @property
    def lo(self) -> float:
        return min(self.start, self.end)

    @property
    def hi(self) -> float:
        return max(self.start, self.end)


class Relation(str, Enum):
    COVERS = "covers"
    INTERSECTS = "intersects"
    DISJOINT = "disjoint"


@dataclass(frozen=True, eq=False)
class Trace:
    """A road segment resolved against a network: its pieces in travel
    order, with cumulative offsets along the segment."""

    pieces: tuple[Piece, ...]
    edge_lengths: tuple[float, ...]
    junctions: tuple[str, ...]          # vertex between piece i and i+1
    first_vertex: str | None            # vertex at the start, if any
    last_vertex: str | None             # vertex at the end, if any
    offsets: tuple[float, ...] = field(init=False)
    by_edge: dict[str, int] = field(init=False)
    vertex_offsets: dict[str, tuple[float, ...]] = field(init=False)

    def __post_init__(self):
        offs = [0.0]
        for p, L in zip(self.pieces, self.edge_lengths):
            offs.append(offs[-1] + abs(p.end - p.start) * L)
        object.__setattr__(self, "offsets", tuple(offs))
        object.__setattr__(self, "by_edge", {p.eid: i for i, p in enumerate(self.pieces)})
        at: dict[str, list[float]] = {}
        if self.first_vertex is not None:
            at.setdefault(self.first_vertex, []).append(0.0)
        for i, v in enumerate(self.junctions):
            at.setdefault(v, []).append(offs[i + 1])
        if self.last_vertex is not None:
            at.setdefault(self.last_vertex, []).append(offs[-1])
        object.__setattr__(self, "vertex_offsets", {v: tuple(ts) for v, ts in at.items()})

    @property
    def length(self) -> float:
        return self.offsets[-1]

    def offset_at(self, i: int, d: float) -> float:
        """Offset along the segment of edge offset ``d`` on piece ``i``."""
        p = self.pieces[i]
        return self.offsets[i] + abs(d - p.start) * self.edge_lengths[i]

    def edge_offset(self, i: int, t: float) -> float:
        """Edge offset on piece ``i`` of segment offset ``t``."""
        p = self.pieces[i]
        frac = (t - self.offsets[i]) / self.edge_lengths[i]
        return p.start + frac if p.end >= p.start else p.start - frac

    def locate(self, eid: str, d: float) -> float | None:
        """Segment offset of the point ``(eid, d)`` if the segment's piece on
        that edge contains it, else ``None``."""
        i = self.by_edge.get(eid)
        if i is None:
            return None
        p = self.pieces[i]
        if p.lo - TOL <= d <= p.hi + TOL:
            return self.offset_at(i, min(max(d, p.lo), p.hi))
        return None

    def locate_point(self, net: RoadNetwork, p: NetworkPoint) -> float | None:
        """Smallest segment offset at which the segment passes through ``p``."""
        v = net.edge(p.eid).vertex_at(p.d)
        if v is not None:
            ts = self.vertex_offsets.get(v)
            return min(ts) if ts else None
        return self.locate(p.eid, p.d)

    def piece_index(self, t: float) -> int:
        i = bisect_right(self.offsets, t) - 1
        return min(max(i, 0), len(self.pieces) - 1)

    def point_at(self, t: float) -> NetworkPoint:
        i = self.piece_index(t)
        return NetworkPoint(self.pieces[i].eid, snap(self.edge_offset(i, t)))

    def sub(self, t0: float, t1: float) -> RoadSegment:
        """The part of the segment between offsets ``t0 < t1``."""
        eps = TOL * max(1.0, self.length)
        i0 = self.piece_index(t0)
        while i0 + 1 < len(self.pieces) and t0 >= self.offsets[i0 + 1] - eps:
            i0 += 1
        i1 = self.piece_index(t1)
        while i1 > 0 and t1 <= self.offsets[i1] + eps:
            i1 -= 1
        start = NetworkPoint(self.pieces[i0].eid, snap(self.edge_offset(i0, t0)))
        end = NetworkPoint(self.pieces[i1].eid, snap(self.edge_offset(i1, t1)))
        return RoadSegment(start, self.junctions[i0:i1], end)


class RoadNetwork:
    """Immutable undirected road network with Euclidean edge lengths."""

    def __init__(self, vertices: Iterable[Vertex], edges: Iterable[tuple[str, str, str]]):
        self.vertices: dict[str, Vertex] = {}
        for v in vertices:
            if v.id in self.vertices:
                raise NetworkError(f"duplicate vertex id {v.id}")
            if not (math.isfinite(v.x) and math.isfinite(v.y)):
                raise NetworkError(f"vertex {v.id} has non-finite coordinates")
            self.vertices[v.id] = v
        self.edges: dict[str, Edge] = {}
        self._pair: dict[frozenset, str] = {}
        adj: dict[str, list[str]] = {vid: [] for vid in self.vertices}
        for eid, src, dst in edges:
            if eid in self.edges:
                raise NetworkError(f"duplicate edge id {eid}")
            if src not in self.vertices or dst not in self.vertices:
                raise NetworkError(f"edge {eid} references an unknown vertex")
            if src == dst:
                raise NetworkError(f"edge {eid} is a self loop")
            pair = frozenset((src, dst))
            if pair in self._pair:
                raise NetworkError(f"edge {eid} duplicates edge {self._pair[pair]}")
            a, b = self.vertices[src], self.vertices[dst]
            length = math.hypot(a.x - b.x, a.y - b.y)
            if length <= 0:
                raise NetworkError(f"edge {eid} has zero length")
            self.edges[eid] = Edge(eid, src, dst, length)
            self._pair[pair] = eid
            adj[src].append(eid)
            adj[dst].append(eid)
        self.adjacency: dict[str, tuple[str, ...]] = {v: tuple(es) for v, es in adj.items()}
        self.min_edge_length = min((e.length for e in self.edges.values()), default=1.0)

    def __repr__(self) -> str:
        return f"RoadNetwork({len(self.vertices)} vertices, {len(self.edges)} edges)"

    def edge(self, eid: str) -> Edge:
        try:
            return self.edges[eid]
        except KeyError:
            raise NetworkError(f"unknown edge {eid}") from None

    def edge_between(self, u: str, v: str) -> Edge:
        eid = self._pair.get(frozenset((u, v)))
        if eid is None:
            raise NetworkError(f"no edge between {u} and {v}")
        return self.edges[eid]

    def check_point(self, p: NetworkPoint) -> NetworkPoint:
        self.edge(p.eid)
        if not (-TOL <= p.d <= 1 + TOL):
            raise NetworkError(f"offset {p.d} of point on {p.eid} is outside [0, 1]")
        return NetworkPoint(p.eid, snap(min(max(p.d, 0.0), 1.0)))

    def point_distance_on_edge(self, p1: NetworkPoint, p2: NetworkPoint) -> float:
        if p1.eid != p2.eid:
            raise NetworkError(f"points lie on different edges ({p1.eid}, {p2.eid})")
        return self.edge(p1.eid).length * abs(p1.d - p2.d)

    # -- segments -----------------------------------------------------------

    def trace(self, seg: RoadSegment) -> Trace:
        """Resolve ``seg`` into pieces; raises NetworkError when invalid."""
        p1, pn = self.check_point(seg.start), self.check_point(seg.end)
        pieces: list[Piece] = []
        junctions: list[str] = []
        if not seg.via:
            if p1.eid != pn.eid:
                raise NetworkError("a two-point segment must lie on one edge")
            pieces.append(Piece(p1.eid, p1.d, pn.d))
        else:
            first = self.edge(p1.eid)
            if seg.via[0] not in (first.src, first.dst):
                raise NetworkError(f"edge {first.id} does not reach vertex {seg.via[0]}")
            pieces.append(Piece(first.id, p1.d, first.offset_of(seg.via[0])))
            for u, v in zip(seg.via, seg.via[1:]):
                e = self.edge_between(u, v)
                pieces.append(Piece(e.id, e.offset_of(u), e.offset_of(v)))
            last = self.edge(pn.eid)
            if seg.via[-1] not in (last.src, last.dst):
                raise NetworkError(f"edge {last.id} does not reach vertex {seg.via[-1]}")
            pieces.append(Piece(last.id, last.offset_of(seg.via[-1]), pn.d))
            junctions = list(seg.via)
        # zero-length end pieces occur when an end point sits on a via vertex
        if len(pieces) > 1 and pieces[0].start == pieces[0].end:
            pieces.pop(0)
            junctions.pop(0)
        if len(pieces) > 1 and pieces[-1].start == pieces[-1].end:
            pieces.pop()
            junctions.pop()
        seen = set()
        for p in pieces:
            if p.eid in seen:
                raise NetworkError(f"segment traverses edge {p.eid} more than once")
            seen.add(p.eid)
        edges = [self.edges[p.eid] for p in pieces]
        return Trace(
            pieces=tuple(pieces),
            edge_lengths=tuple(e.length for e in edges),
            junctions=tuple(junctions),
            first_vertex=edges[0].vertex_at(pieces[0].start),
            last_vertex=edges[-1].vertex_at(pieces[-1].end),
        )

    def segment_length(self, seg: RoadSegment) -> float:
        return self.trace(seg).length

    def split_segment(self, seg: RoadSegment, beta: int) -> list[RoadSegment]:
        """Cut ``seg`` into ``beta`` subsegments of equal length."""
        if beta < 2:
            raise ValueError(f"beta must be at least 2, got {beta}")
        tr = self.trace(seg)
        if tr.length <= TOL:
            raise ValueError("cannot split a zero-length segment")
        cuts = [tr.length * i / beta for i in range(beta + 1)]
        parts = [tr.sub(a, b) for a, b in zip(cuts, cuts[1:])]
        # keep the outer ends bit-identical to the input
        parts[0] = RoadSegment(seg.start.snapped(), parts[0].via, parts[0].end)
        parts[-1] = RoadSegment(parts[-1].start, parts[-1].via, seg.end.snapped())
        return parts

    def segment_relation(self, r: RoadSegment, s: RoadSegment) -> Relation:
        """How route ``r`` relates to segment ``s``.

        Contact in a single point does not count as an intersection: only
        overlaps of positive length do.
        """
        rt, st = self.trace(r), self.trace(s)
        covered = True
        touched = False
        for p in st.pieces:
            i = rt.by_edge.get(p.eid)
            if i is None:
                covered = False
                continue
            q = rt.pieces[i]
            if min(q.hi, p.hi) - max(q.lo, p.lo) > TOL:
                touched = True
            if not (q.lo <= p.lo + TOL and p.hi <= q.hi + TOL):
                covered = False
        if covered and st.length > TOL:
            return Relation.COVERS
        return Relation.INTERSECTS if touched else Relation.DISJOINT

    # -- distances ----------------------------------------------------------

    def point_sources(self, p: NetworkPoint) -> dict[str, float]:
        e = self.edge(p.eid)
        return {e.src: p.d * e.length, e.dst: (1.0 - p.d) * e.length}

    def dijkstra(self, sources: dict[str, float], cap: float = math.inf) -> dict[str, float]:
        """Shortest distances from ``sources`` to every vertex within ``cap``."""
        dist: dict[str, float] = {}
        heap = [(d, v) for v, d in sources.items() if d <= cap]
        heapq.heapify(heap)
        while heap:
            d, v = heapq.heappop(heap)
            if v in dist:
                continue
            dist[v] = d
            for eid in self.adjacency[v]:
                e = self.edges[eid]
                w = e.other(v)
                nd = d + e.length
                if w not in dist and nd <= cap:
                    heapq.heappush(heap, (nd, w))
        return dist

    def nearest_on_trace(self, p: NetworkPoint, tr: Trace, cap: float = math.inf,
                         dist: dict[str, float] | None = None) -> tuple[float, float | None]:
        """Network distance from ``p`` to the traced segment and the segment
        offset of the nearest point (smallest offset on ties).

        Returns ``(inf, None)`` when the segment is farther than ``cap``.
        ``dist`` may carry a precomputed ``dijkstra`` from ``p``.
        """
        if dist is None:
            dist = self.dijkstra(self.point_sources(p), cap)
        best, best_t = math.inf, None

        def offer(dd: float, t: float):
            nonlocal best, best_t
            if dd < best - TOL or (dd <= best + TOL and (best_t is None or t < best_t)):
                best, best_t = min(dd, best), t

        for i, pc in enumerate(tr.pieces):
            e = self.edges[pc.eid]
            L = e.length
            lo, hi = pc.lo, pc.hi
            if pc.eid == p.eid:
                if lo - TOL <= p.d <= hi + TOL:
                    offer(0.0, tr.offset_at(i, min(max(p.d, lo), hi)))
                elif p.d < lo:
                    offer((lo - p.d) * L, tr.offset_at(i, lo))
                else:
                    offer((p.d - hi) * L, tr.offset_at(i, hi))
            if e.src in dist:
                offer(dist[e.src] + lo * L, tr.offset_at(i, lo))
            if e.dst in dist:
                offer(dist[e.dst] + (1.0 - hi) * L, tr.offset_at(i, hi))
        if best > cap:
            return math.inf, None
        return best, best_t

    def distance_point_to_segment(self, p: NetworkPoint, seg: RoadSegment,
                                  cap: float = math.inf) -> float:
        """Shortest network distance from ``p`` to any point of ``seg``;
        ``inf`` when it exceeds ``cap``."""
        if cap < 0:
            raise ValueError("cap must be non-negative")
        return self.nearest_on_trace(self.check_point(p), self.trace(seg), cap)[0]

    def edges_within(self, tr: Trace, radius: float) -> set[str]:
        """Edges traversed by the traced segment plus every edge having a point
        within network distance ``radius`` of it."""
        sources: dict[str, float] = {}

        def seed(v: str, d: float):
            if d < sources.get(v, math.inf):
                sources[v] = d

        for pc, L in zip(tr.pieces, tr.edge_lengths):
            e = self.edges[pc.eid]
            seed(e.src, pc.lo * L)
            seed(e.dst, (1.0 - pc.hi) * L)
        dist = self.dijkstra(sources, radius)
        found = set(tr.by_edge)
        for v in dist:
            found.update(self.adjacency[v])
        return found


# -- assembling maximal segments ----------------------------------------------

def merge_intervals(intervals: Iterable[tuple[str, float, float]]) -> dict[str, list[tuple[float, float]]]:
    """Group ``(eid, lo, hi)`` by edge and merge touching intervals."""
    by_edge: dict[str, list[tuple[float, float]]] = {}
    for eid, lo, hi in intervals:
        by_edge.setdefault(eid, []).append((snap(lo), snap(hi)))
    merged = {}
    for eid, ivs in by_edge.items():
        ivs.sort()
        out = [list(ivs[0])]
        for lo, hi in ivs[1:]:
            if lo <= out[-1][1] + TOL:
                out[-1][1] = max(out[-1][1], hi)
            else:
                out.append([lo, hi])
        merged[eid] = [(a, b) for a, b in out]
    return merged


def assemble_segments(net: RoadNetwork, intervals: Iterable[tuple[str, float, float]]) -> list[RoadSegment]:
    """Join edge intervals into maximal chains.

    Intervals on one edge are merged when they touch; across edges they are
    chained through vertices where exactly two intervals meet. Branching
    vertices end chains. Closed cycles start at their smallest vertex id.
    Returns canonical segments sorted by their key.
    """
    merged = merge_intervals(intervals)
    # each interval is an "arc" between two nodes; a node is a vertex id or a
    # dangling interior end
    arcs: list[tuple[str, float, float, object, object]] = []
    for eid in sorted(merged):
        e = net.edge(eid)
        for lo, hi in merged[eid]:
            a = e.src if lo == 0.0 else ("end", eid, lo)
            b = e.dst if hi == 1.0 else ("end", eid, hi)
            arcs.append((eid, lo, hi, a, b))
    incident: dict[object, list[int]] = {}
    for k, (_, _, _, a, b) in enumerate(arcs):
        incident.setdefault(a, []).append(k)
        incident.setdefault(b, []).append(k)

    used = [False] * len(arcs)

    def walk(node, k) -> list[Piece]:
        chain = []
        while True:
            used[k] = True
            eid, lo, hi, a, b = arcs[k]
            if node == a:
                chain.append(Piece(eid, lo, hi))
                node = b
            else:
                chain.append(Piece(eid, hi, lo))
                node = a
            nxt = incident[node]
            if isinstance(node, tuple) or len(nxt) != 2:
                return chain
            k = nxt[0] if nxt[1] == k else nxt[1]
            if used[k]:
                return chain

    chains = []
    starts = sorted((n for n in incident if len(incident[n]) != 2), key=_node_key)
    for n in starts:
        for k in incident[n]:
            if not used[k]:
                chains.append(walk(n, k))
    for n in sorted((n for n in incident if not isinstance(n, tuple)), key=_node_key):
        for k in incident[n]:
            if not used[k]:
                chains.append(walk(n, k))

    segs = [_chain_segment(net, c).canonical() for c in chains]
    return sorted(segs, key=RoadSegment.key)


def _node_key(n) -> tuple:
    return (1, n[1], n[2]) if isinstance(n, tuple) else (0, n, 0.0)


def _chain_segment(net: RoadNetwork, chain: list[Piece]) -> RoadSegment:
    via = []
    for pc in chain[:-1]:
        via.append(net.edge(pc.eid).vertex_at(pc.end))
    return RoadSegment(NetworkPoint(chain[0].eid, chain[0].start), tuple(via),
                       NetworkPoint(chain[-1].eid, chain[-1].end))
