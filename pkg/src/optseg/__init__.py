"""Optimal segment queries on road networks."""

from .aug import aug_query
from .demand import Facility, RouteUsageObject, ValidationError, attracts, make_facility, make_route
from .formats import (ParseError, read_facilities, read_network, read_routes, write_facilities,
                      write_network, write_routes)
from .ite import IteMetrics, ite_query
from .netgraph import NetworkPoint, RoadNetwork, RoadSegment, Vertex
from .oracle import oracle_query
from .preprocess import preprocess
from .result import QueryResult, results_match
from .scoring import DistributionModel, ScoringFunction, point_score, route_score, weight

__all__ = [
    "Facility", "RouteUsageObject", "ValidationError", "attracts", "make_facility", "make_route",
    "ParseError", "read_network", "read_facilities", "read_routes",
    "write_network", "write_facilities", "write_routes",
    "IteMetrics", "ite_query", "aug_query", "oracle_query", "preprocess",
    "NetworkPoint", "RoadNetwork", "RoadSegment", "Vertex",
    "QueryResult", "results_match",
    "DistributionModel", "ScoringFunction", "point_score", "route_score", "weight",
]
