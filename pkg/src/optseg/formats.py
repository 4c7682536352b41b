"""Plain-text readers and writers for networks, facilities, routes and
query results. One record per line, whitespace separated, ``#`` starts a
comment."""

from __future__ import annotations

from typing import Iterable, Iterator

from .demand import Facility, RouteUsageObject, make_facility, make_route
from .netgraph import NetworkPoint, RoadNetwork, RoadSegment, Vertex
from .result import QueryResult


class ParseError(ValueError):
    def __init__(self, path, line: int, msg: str):
        super().__init__(f"{path}:{line}: {msg}")
        self.path, self.line = str(path), line


def _records(path) -> Iterator[tuple[int, list[str]]]:
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, 1):
            text = raw.split("#", 1)[0].split()
            if text:
                yield n, text


def _point(tok: str) -> NetworkPoint:
    eid, sep, d = tok.rpartition(":")
    if not sep or not eid:
        raise ValueError(f"expected <eid>:<d>, got {tok!r}")
    return NetworkPoint(eid, float(d))


def read_network(path) -> RoadNetwork:
    verts, edges = [], []
    for n, tok in _records(path):
        try:
            if tok[0] == "V" and len(tok) == 4:
                verts.append(Vertex(tok[1], float(tok[2]), float(tok[3])))
            elif tok[0] == "E" and len(tok) == 4:
                edges.append((tok[1], tok[2], tok[3]))
            else:
                raise ValueError(f"unrecognised record {' '.join(tok)!r}")
        except ValueError as exc:
            raise ParseError(path, n, str(exc)) from None
    try:
        return RoadNetwork(verts, edges)
    except ValueError as exc:
        raise ParseError(path, 0, str(exc)) from None


def read_facilities(path, net: RoadNetwork) -> list[Facility]:
    out = []
    for n, tok in _records(path):
        try:
            if tok[0] != "F" or len(tok) != 4:
                raise ValueError(f"unrecognised record {' '.join(tok)!r}")
            out.append(make_facility(net, tok[1], NetworkPoint(tok[2], float(tok[3]))))
        except ValueError as exc:
            raise ParseError(path, n, str(exc)) from None
    return out


def read_routes(path, net: RoadNetwork) -> list[RouteUsageObject]:
    out = []
    for n, tok in _records(path):
        try:
            if tok[0] != "R" or len(tok) < 6:
                raise ValueError(f"unrecognised record {' '.join(tok)!r}")
            count = int(tok[2])
            usages = [int(u) for u in tok[3].split(",")]
            if count != len(usages):
                raise ValueError(f"count {count} but {len(usages)} usages")
            seg = RoadSegment(_point(tok[4]), tuple(tok[5:-1]), _point(tok[-1]))
            out.append(make_route(net, tok[1], seg, usages))
        except ValueError as exc:
            raise ParseError(path, n, str(exc)) from None
    return out


def write_network(net: RoadNetwork, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for v in net.vertices.values():
            fh.write(f"V {v.id} {v.x!r} {v.y!r}\n")
        for e in net.edges.values():
            fh.write(f"E {e.id} {e.src} {e.dst}\n")


def _fmt_point(p: NetworkPoint) -> str:
    return f"{p.eid}:{p.d!r}"


def write_facilities(facilities: Iterable[Facility], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for f in facilities:
            fh.write(f"F {f.fid} {f.p.eid} {f.p.d!r}\n")


def write_routes(routes: Iterable[RouteUsageObject], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ro in routes:
            pts = [_fmt_point(ro.r.start), *ro.r.via, _fmt_point(ro.r.end)]
            usages = ",".join(str(u) for u in ro.usages)
            fh.write(f"R {ro.rid} {ro.count} {usages} {' '.join(pts)}\n")


def format_result(res: QueryResult) -> str:
    lines = [f"SCORE {res.score:.9g}"]
    lines.extend(f"SEG {s}" for s in res.segments)
    return "\n".join(lines) + "\n"


def read_result(path) -> tuple[float, list[RoadSegment]]:
    score, segs = None, []
    for n, tok in _records(path):
        try:
            if tok[0] == "SCORE" and len(tok) == 2:
                score = float(tok[1])
            elif tok[0] == "SEG" and len(tok) >= 3:
                segs.append(RoadSegment(_point(tok[1]), tuple(tok[2:-1]), _point(tok[-1])))
            else:
                raise ValueError(f"unrecognised record {' '.join(tok)!r}")
        except ValueError as exc:
            raise ParseError(path, n, str(exc)) from None
    if score is None:
        raise ParseError(path, 0, "missing SCORE line")
    return score, segs
