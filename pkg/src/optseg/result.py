"""Query results and their comparison."""

from __future__ import annotations

from dataclasses import dataclass, field

from .netgraph import RoadSegment, close, segments_match


@dataclass
class QueryResult:
    score: float
    segments: list[RoadSegment]
    metrics: dict[str, int] = field(default_factory=dict)

    def __iter__(self):
        # lets callers write ``score, segs = query(...)``
        yield self.score
        yield self.segments


def results_match(a: QueryResult, b: QueryResult, tol: float = 1e-7) -> bool:
    """Same optimal score and the same set of maximal segments."""
    if not close(a.score, b.score, 1e-9):
        return False
    if len(a.segments) != len(b.segments):
        return False
    unmatched = list(b.segments)
    for s in a.segments:
        for i, t in enumerate(unmatched):
            if segments_match(s, t, tol):
                del unmatched[i]
                break
        else:
            return False
    return True
