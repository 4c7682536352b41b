"""Query by iterative, bound-guided partitioning.

Candidate segments live on single edges and are kept in a max-heap on
their upper bound score. The best candidate is split into ``beta`` equal
parts until its bounds meet the best lower bound seen so far; such a tight
candidate is an optimal subsegment and is grown into the maximal optimal
segment around it.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .demand import Facility, RouteUsageObject
from .netgraph import TOL, RoadNetwork, assemble_segments, close
from .preprocess import Coverage, PreprocessedIndex, piece_values, preprocess
from .result import QueryResult
from .scoring import SCORE_ALL, DistributionModel, ScoringFunction

MIN_SPLIT_FRACTION = 1e-6


@dataclass
class BoundedSegment:
    """A candidate ``[a, b]`` (offsets) on edge ``eid``.

    ``I`` and ``C`` hold positions into the edge's coverage list: the
    routes overlapping the candidate and those covering all of it.
    """

    eid: str
    a: float
    b: float
    I: tuple[int, ...]
    C: tuple[int, ...]
    lb: float
    ub: float
    length: float = 0.0


@dataclass
class IteMetrics:
    total: int = 0
    splits: int = 0
    prune1: int = 0
    prune2: int = 0
    accepted: int = 0

    def as_dict(self) -> dict[str, int]:
        return {"total": self.total, "splits": self.splits, "prune1": self.prune1,
                "prune2": self.prune2, "accepted": self.accepted}


@dataclass
class _Result:
    pairs: frozenset          # (rid, j) of every covering route piece
    component: int


@dataclass
class _State:
    net: RoadNetwork
    index: PreprocessedIndex
    values: dict[str, tuple[float, ...]]
    atoms: dict[str, list[tuple[float, float, float]]] = field(default_factory=dict)
    # extended optimal region: per edge, (lo, hi, component id)
    region: dict[str, list[tuple[float, float, int]]] = field(default_factory=dict)
    results: list[_Result] = field(default_factory=list)


def _span_values(cov: Coverage, vals: tuple[float, ...], a: float, b: float):
    for lo, hi, j in cov.spans:
        if min(hi, b) - max(lo, a) > TOL:
            yield vals[j - 1], j


def compute_bounds(eid: str, a: float, b: float, candidates: Sequence[int],
                   index: PreprocessedIndex, values: dict[str, tuple[float, ...]],
                   length: float) -> BoundedSegment:
    """Bounds of ``[a, b]`` on ``eid`` using only the coverage entries listed
    in ``candidates`` (a parent's ``I``)."""
    covs = index.edge_coverage.get(eid, ())
    I, C = [], []
    lb = ub = 0.0
    for n in candidates:
        cov = covs[n]
        if min(cov.hi, b) - max(cov.lo, a) <= TOL:
            continue
        vs = [v for v, _ in _span_values(cov, values[cov.rid], a, b)]
        I.append(n)
        ub += max(vs)
        if cov.lo <= a + TOL and cov.hi >= b - TOL:
            C.append(n)
            lb += min(vs)
    return BoundedSegment(eid, a, b, tuple(I), tuple(C), lb, ub, (b - a) * length)


def _pairs(seg: BoundedSegment, members: Sequence[int], index: PreprocessedIndex,
           values) -> frozenset:
    covs = index.edge_coverage[seg.eid]
    out = set()
    for n in members:
        cov = covs[n]
        for _, j in _span_values(cov, values[cov.rid], seg.a, seg.b):
            out.add((cov.rid, j))
    return frozenset(out)


def _breakpoints(covs: Sequence[Coverage], members: Sequence[int], a: float, b: float) -> list[float]:
    pts = set()
    for n in members:
        cov = covs[n]
        pts.update((cov.lo, cov.hi))
        for lo, hi, _ in cov.spans:
            pts.update((lo, hi))
    out: list[float] = []
    for p in sorted(p for p in pts if a + TOL < p < b - TOL):
        if not out or p - out[-1] > TOL:
            out.append(p)
    if out and b - out[-1] <= TOL:
        out.pop()
    return out


def _split_points(seg: BoundedSegment, beta: int, covs, min_len: float) -> list[float]:
    if seg.b - seg.a < MIN_SPLIT_FRACTION or seg.length < min_len:
        inner = _breakpoints(covs, seg.I, seg.a, seg.b)
        return [seg.a, *inner, seg.b] if inner else []
    w = seg.b - seg.a
    return [seg.a + w * i / beta for i in range(beta)] + [seg.b]


# -- growing an optimal subsegment into its maximal segment --------------------

def _edge_atoms(st: _State, eid: str) -> list[tuple[float, float, float]]:
    """Pieces of ``eid`` between consecutive score breakpoints, with scores."""
    got = st.atoms.get(eid)
    if got is not None:
        return got
    covs = st.index.edge_coverage.get(eid, ())
    pts = {0.0, 1.0}
    for cov in covs:
        pts.update((cov.lo, cov.hi))
        for lo, hi, _ in cov.spans:
            pts.update((lo, hi))
    ds = sorted(pts)
    atoms = []
    for lo, hi in zip(ds, ds[1:]):
        if hi - lo <= TOL:
            continue
        mid = (lo + hi) / 2
        s = 0.0
        for cov in covs:
            if cov.lo < mid < cov.hi:
                for a, b, j in cov.spans:
                    if a <= mid <= b:
                        s += st.values[cov.rid][j - 1]
                        break
        atoms.append((lo, hi, s))
    st.atoms[eid] = atoms
    return atoms


def _in_region(st: _State, eid: str, lo: float, hi: float) -> int | None:
    for a, b, comp in st.region.get(eid, ()):
        if min(b, hi) - max(a, lo) > TOL:
            return comp
    return None


def _extend(st: _State, seg: BoundedSegment, opt: float) -> int:
    """Flood the optimal region from ``seg`` across edges and vertices;
    returns the id of the component ``seg`` belongs to."""
    comp = _in_region(st, seg.eid, seg.a, seg.b)
    if comp is not None:
        return comp
    comp = len(st.results)
    net = st.net
    seen: set[tuple[str, int]] = set()
    stack = []
    for n, (lo, hi, s) in enumerate(_edge_atoms(st, seg.eid)):
        if min(hi, seg.b) - max(lo, seg.a) > TOL and close(s, opt):
            stack.append((seg.eid, n))
    while stack:
        eid, n = stack.pop()
        if (eid, n) in seen:
            continue
        seen.add((eid, n))
        atoms = _edge_atoms(st, eid)
        lo, hi, _ = atoms[n]
        st.region.setdefault(eid, []).append((lo, hi, comp))
        for m in (n - 1, n + 1):
            if 0 <= m < len(atoms) and close(atoms[m][2], opt):
                stack.append((eid, m))
        e = net.edges[eid]
        ends = []
        if n == 0:
            ends.append(e.src)
        if n == len(atoms) - 1:
            ends.append(e.dst)
        for v in ends:
            for other in net.adjacency[v]:
                if other == eid:
                    continue
                oat = _edge_atoms(st, other)
                m = 0 if net.edges[other].src == v else len(oat) - 1
                if oat and close(oat[m][2], opt):
                    stack.append((other, m))
    return comp


def _duplicate_prunes(st: _State, seg: BoundedSegment) -> bool:
    """True when ``seg`` only holds routes covering an accepted result and
    overlaps that result's already grown segment, so it cannot lead to a
    new optimal segment."""
    if not st.results:
        return False
    comps = {c for a, b, c in st.region.get(seg.eid, ())
             if min(b, seg.b) - max(a, seg.a) > TOL}
    if not comps:
        return False
    mine = _pairs(seg, seg.I, st.index, st.values)
    return any(r.component in comps and mine <= r.pairs for r in st.results)


def ite_query(net: RoadNetwork, routes: Sequence[RouteUsageObject],
              facilities: Sequence[Facility], delta: float, beta: int = 4,
              fn: ScoringFunction = SCORE_ALL,
              model: DistributionModel = DistributionModel.EQUAL,
              index: PreprocessedIndex | None = None, prune_duplicates: bool = True,
              recorder: Callable[[str, BoundedSegment, float], None] | None = None
              ) -> QueryResult:
    """``recorder(action, segment, max_lb)`` is called for every generated
    and every dequeued segment; actions are ``push``, ``split``, ``accept``,
    ``prune1`` and ``prune2``."""
    if beta < 2:
        raise ValueError(f"beta must be at least 2, got {beta}")
    if index is None:
        index = preprocess(net, routes, facilities, delta)
    metrics = IteMetrics()
    if not routes:
        return QueryResult(0.0, [], metrics.as_dict())
    values = piece_values(index, routes, fn, model)
    st = _State(net, index, values)
    min_len = MIN_SPLIT_FRACTION * net.min_edge_length
    note = recorder or (lambda *_: None)

    seq = itertools.count()
    heap: list = []

    def push(s: BoundedSegment):
        heapq.heappush(heap, (-s.ub, -s.lb, -s.length, next(seq), s))

    # initial candidates: whole edges, lb left at zero
    for eid in sorted(index.edge_coverage):
        covs = index.edge_coverage[eid]
        ub = sum(max(values[c.rid][j - 1] for _, _, j in c.spans) for c in covs)
        if ub > TOL:
            L = net.edges[eid].length
            s = BoundedSegment(eid, 0.0, 1.0, tuple(range(len(covs))), (), 0.0, ub, L)
            push(s)
            note("push", s, 0.0)

    max_lb = 0.0
    while heap:
        cur = heapq.heappop(heap)[-1]
        if cur.ub < max_lb and not close(cur.ub, max_lb):
            # every remaining candidate has an even smaller upper bound
            metrics.prune1 += 1 + len(heap)
            note("prune1", cur, max_lb)
            for item in heap:
                note("prune1", item[-1], max_lb)
            heap.clear()
            break
        tight = close(cur.ub, max_lb)
        if tight and close(cur.ub, cur.lb):
            metrics.accepted += 1
            note("accept", cur, max_lb)
            comp = _extend(st, cur, max_lb)
            st.results.append(_Result(_pairs(cur, cur.C, index, values), comp))
            continue
        if tight and prune_duplicates and _duplicate_prunes(st, cur):
            metrics.prune2 += 1
            note("prune2", cur, max_lb)
            continue
        covs = index.edge_coverage[cur.eid]
        cuts = _split_points(cur, beta, covs, min_len)
        if not cuts:
            # no breakpoint inside: the score is constant here, so the bounds
            # can only disagree within rounding
            cur.lb = cur.ub
            max_lb = max(max_lb, cur.lb)
            push(cur)
            continue
        metrics.splits += 1
        note("split", cur, max_lb)
        L = net.edges[cur.eid].length
        for a, b in zip(cuts, cuts[1:]):
            child = compute_bounds(cur.eid, a, b, cur.I, index, values, L)
            metrics.total += 1
            if child.lb > max_lb:
                max_lb = child.lb
            note("push", child, max_lb)
            if child.ub > TOL:
                push(child)

    if max_lb <= TOL or not st.region:
        return QueryResult(0.0, [], metrics.as_dict())
    intervals = [(eid, lo, hi) for eid, ivs in st.region.items() for lo, hi, _ in ivs]
    return QueryResult(max_lb, assemble_segments(net, intervals), metrics.as_dict())
