"""Core domain types: local metric frame, traces, semantic points, road graphs.

Everything downstream (rasterization, matching, metrics) works in a local
tangent-plane frame in meters, so these types carry plain XY(Z) coordinates.
All types are immutable values after construction; transformations produce
new objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

import numpy as np

from .errors import InvalidInputError, InvariantViolation, NotFoundError

EARTH_RADIUS_M = 6378137.0

# Node/polyline endpoints must coincide within this distance (meters).
ENDPOINT_TOL = 1e-6


class Provenance(str, Enum):
    SEGMENTATION = "segmentation"
    GAP_FILL = "gap_fill"
    GROUND_TRUTH = "ground_truth"


class SemanticClass(str, Enum):
    LANE_MARKING = "lane_marking"
    ROAD_BOUNDARY = "road_boundary"


@dataclass(frozen=True, slots=True)
class LocalFrame:
    """Tangent-plane frame anchored at a geographic origin."""

    origin_lat: float
    origin_lon: float
    earth_radius: float = EARTH_RADIUS_M

    def __post_init__(self) -> None:
        if not (math.isfinite(self.origin_lat) and math.isfinite(self.origin_lon)):
            raise InvalidInputError("frame origin must be finite")
        if abs(self.origin_lat) > 90 or abs(self.origin_lon) > 180:
            raise InvalidInputError(
                f"frame origin out of range: ({self.origin_lat}, {self.origin_lon})"
            )


@dataclass(frozen=True, slots=True)
class LocalPoint:
    """Meters east (x) / north (y) of the frame origin, plus elevation z."""

    x: float
    y: float
    z: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise InvalidInputError(f"non-finite coordinate: ({self.x}, {self.y}, {self.z})")

    def xy(self) -> tuple[float, float]:
        return (self.x, self.y)


def project_to_local(lat: float, lon: float, alt: float, frame: LocalFrame) -> LocalPoint:
    """Equirectangular projection of a geographic coordinate into ``frame``.

    Adequate at the few-kilometer tile extents this toolkit operates on,
    where the distortion is sub-decimeter.
    """
    if not (math.isfinite(lat) and math.isfinite(lon) and math.isfinite(alt)):
        raise InvalidInputError("non-finite geographic coordinate")
    if abs(lat) > 90:
        raise InvalidInputError(f"latitude out of range: {lat}")
    x = frame.earth_radius * math.cos(math.radians(frame.origin_lat)) * math.radians(lon - frame.origin_lon)
    y = frame.earth_radius * math.radians(lat - frame.origin_lat)
    return LocalPoint(x, y, alt)


# Ingest/generator contract: consecutive trace points may be at most this far apart.
MAX_POINT_SPACING = 100.0


@dataclass(frozen=True)
class GnssTrace:
    trace_id: str
    points: tuple[LocalPoint, ...]

    def __post_init__(self) -> None:
        if len(self.points) < 2:
            raise InvalidInputError(f"trace {self.trace_id!r} needs >= 2 points")
        xy = self.xy()
        gaps = np.hypot(np.diff(xy[:, 0]), np.diff(xy[:, 1]))
        if len(gaps) and float(gaps.max()) > MAX_POINT_SPACING:
            raise InvalidInputError(
                f"trace {self.trace_id!r} has a {gaps.max():.1f} m point gap (limit {MAX_POINT_SPACING} m)"
            )

    def xy(self) -> np.ndarray:
        return np.array([(p.x, p.y) for p in self.points])


@dataclass(frozen=True, slots=True)
class SemanticPoint:
    position: LocalPoint
    semantic_class: SemanticClass

    def __post_init__(self) -> None:
        if not isinstance(self.semantic_class, SemanticClass):
            raise InvalidInputError(f"unknown semantic class: {self.semantic_class!r}")


@dataclass(frozen=True)
class FleetDataset:
    """Aligned traces plus semantic points in one local frame: the pipeline input."""

    frame: LocalFrame
    traces: tuple[GnssTrace, ...]
    points: tuple[SemanticPoint, ...]


@dataclass(frozen=True)
class Edge:
    a: int
    b: int
    polyline: tuple[LocalPoint, ...]
    provenance: Provenance

    def xy(self) -> np.ndarray:
        return np.array([(p.x, p.y) for p in self.polyline])


class RoadGraph:
    """Undirected geospatial graph: nodes at intersections/dead-ends, edges
    carrying road-centerline polylines.

    Integrity invariants (checked on construction):
      * every edge references existing nodes,
      * polyline endpoints coincide with node positions (XY, 1e-6 m),
      * no zero-length edges.
    """

    def __init__(self, nodes: Mapping[int, LocalPoint], edges: Mapping[int, Edge]):
        self._nodes = dict(nodes)
        self._edges = dict(edges)
        adjacency: dict[int, list[int]] = {nid: [] for nid in self._nodes}
        for eid, edge in self._edges.items():
            for nid in {edge.a, edge.b}:  # self-loops appear once
                if nid not in self._nodes:
                    raise InvariantViolation(f"edge {eid} references missing node {nid}")
                adjacency[nid].append(eid)
        self._adjacency = {nid: tuple(sorted(eids)) for nid, eids in adjacency.items()}
        self._check_geometry()

    def _check_geometry(self) -> None:
        for eid, edge in self._edges.items():
            poly = edge.polyline
            if len(poly) < 2:
                raise InvariantViolation(f"edge {eid} polyline has < 2 points")
            for nid, end in ((edge.a, poly[0]), (edge.b, poly[-1])):
                node = self._nodes[nid]
                if math.hypot(end.x - node.x, end.y - node.y) > ENDPOINT_TOL:
                    raise InvariantViolation(
                        f"edge {eid} endpoint {end.xy()} does not meet node {nid} at {node.xy()}"
                    )
            if self.edge_length(eid) <= 0.0:
                raise InvariantViolation(f"edge {eid} has zero length")

    @property
    def nodes(self) -> Mapping[int, LocalPoint]:
        return self._nodes

    @property
    def edges(self) -> Mapping[int, Edge]:
        return self._edges

    def incident_edges(self, node_id: int) -> set[int]:
        """Edge ids having ``node_id`` as an endpoint; self-loops appear once."""
        if node_id not in self._nodes:
            raise NotFoundError(f"unknown node id {node_id}")
        return set(self._adjacency[node_id])

    def degree(self, node_id: int) -> int:
        """Number of edge ends at the node (a self-loop contributes 2)."""
        if node_id not in self._nodes:
            raise NotFoundError(f"unknown node id {node_id}")
        return sum(2 if self._edges[eid].a == self._edges[eid].b else 1 for eid in self._adjacency[node_id])

    def edge_length(self, edge_id: int) -> float:
        """Euclidean XY length of the edge polyline (elevation ignored)."""
        edge = self._edges.get(edge_id)
        if edge is None:
            raise NotFoundError(f"unknown edge id {edge_id}")
        xy = edge.xy()
        return float(np.hypot(np.diff(xy[:, 0]), np.diff(xy[:, 1])).sum())

    def other_end(self, edge_id: int, node_id: int) -> int:
        edge = self._edges[edge_id]
        return edge.b if node_id == edge.a else edge.a

    def bounds(self) -> tuple[float, float, float, float] | None:
        """(min_x, min_y, max_x, max_y) over all geometry, or None if empty."""
        xs: list[float] = []
        ys: list[float] = []
        for p in self._nodes.values():
            xs.append(p.x)
            ys.append(p.y)
        for e in self._edges.values():
            for p in e.polyline:
                xs.append(p.x)
                ys.append(p.y)
        if not xs:
            return None
        return (min(xs), min(ys), max(xs), max(ys))

    def total_length(self) -> float:
        return sum(self.edge_length(eid) for eid in self._edges)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RoadGraph):
            return NotImplemented
        return self._nodes == other._nodes and self._edges == other._edges

    def __repr__(self) -> str:
        return f"RoadGraph({len(self._nodes)} nodes, {len(self._edges)} edges)"


def incident_edges(graph: RoadGraph, node_id: int) -> set[int]:
    return graph.incident_edges(node_id)


def edge_length(graph: RoadGraph, edge_id: int) -> float:
    return graph.edge_length(edge_id)


def polyline_of(points: Iterable[tuple[float, float] | tuple[float, float, float]]) -> tuple[LocalPoint, ...]:
    """Convenience constructor: coordinate tuples to LocalPoints."""
    return tuple(LocalPoint(*map(float, p)) for p in points)
