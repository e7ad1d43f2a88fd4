"""Deterministic synthetic fleet-data generator.

Produces small ground-truth road graphs, noisy GNSS traces that follow routes
over them, and sparse semantic points (lane markings / road boundaries) offset
laterally from the centerline. Every operation is a pure function of its
inputs and the seed, so generated scenarios double as end-to-end oracles.

Trace noise is a smoothly varying bias (independent targets every correlation
length, linearly interpolated, norm-clamped at 6 sigma) plus white jitter per
point - mimicking sensor-fused trajectories that are locally smooth but carry
meter-level absolute error.
"""

from __future__ import annotations

import heapq
import math
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidInputError
from .geometry import cum_arc_lengths, point_at_arc, project_to_polyline
from .model import (
    Edge,
    GnssTrace,
    LocalPoint,
    Provenance,
    RoadGraph,
    SemanticClass,
    SemanticPoint,
)

SCENARIOS = ("straight", "grid", "overpass", "intersection", "tee")

# Maximum turn (degrees) a straight-through route tolerates at a node.
STRAIGHT_THROUGH_MAX_TURN = 45.0

OVERPASS_CLEARANCE = 6.0


@dataclass(frozen=True, slots=True)
class ScenarioSpec:
    name: str
    extent: float = 1000.0
    lane_width: float = 3.5
    block_size: float | None = None  # grid only; defaults to extent / 2

    def __post_init__(self) -> None:
        if self.name not in SCENARIOS:
            raise InvalidInputError(f"unknown scenario {self.name!r}; expected one of {SCENARIOS}")
        if self.extent <= 0:
            raise InvalidInputError("extent must be > 0")
        if self.lane_width <= 0:
            raise InvalidInputError("lane_width must be > 0")

    def grid_block(self) -> float:
        return self.block_size if self.block_size is not None else self.extent / 2.0


@dataclass(frozen=True, slots=True)
class NoiseModel:
    white_sigma: float = 1.0
    bias_sigma: float = 2.0
    bias_correlation_length: float = 500.0
    point_spacing: float = 5.0
    dropout_prob: float = 0.5

    def __post_init__(self) -> None:
        if self.white_sigma < 0 or self.bias_sigma < 0:
            raise InvalidInputError("noise sigmas must be >= 0")
        if self.bias_correlation_length <= 0 or self.point_spacing <= 0:
            raise InvalidInputError("lengths must be > 0")
        if not 0.0 <= self.dropout_prob <= 1.0:
            raise InvalidInputError("dropout_prob must lie in [0, 1]")


@dataclass(frozen=True)
class TraceOracle:
    """Ground-truth edge id for every point of every generated trace."""

    edges_per_point: dict[str, tuple[int, ...]]

    def for_trace(self, trace_id: str) -> tuple[int, ...]:
        return self.edges_per_point[trace_id]


def make_ground_truth(spec: ScenarioSpec, seed: int = 0) -> RoadGraph:
    """Ground-truth graph for a bundled scenario.

    Layouts are fixed; ``seed`` is accepted for signature uniformity with the
    sampling operations. ``overpass`` crosses two roads in XY at z = 0 and
    z = 6 with no shared node; ``intersection`` shares a degree-4 node.
    """
    del seed
    ext = spec.extent
    mid = ext / 2.0
    nodes: dict[int, LocalPoint]
    edges: dict[int, Edge]

    def straight_edge(eid: int, a: int, b: int, na: LocalPoint, nb: LocalPoint) -> Edge:
        return Edge(a, b, (na, nb), Provenance.GROUND_TRUTH)

    if spec.name == "straight":
        nodes = {0: LocalPoint(0, 0), 1: LocalPoint(ext, 0)}
        edges = {0: straight_edge(0, 0, 1, nodes[0], nodes[1])}
    elif spec.name == "grid":
        bs = spec.grid_block()
        k = ext / bs
        if abs(k - round(k)) > 1e-9 or round(k) < 1:
            raise InvalidInputError(f"block_size {bs} must evenly divide extent {ext}")
        k = int(round(k))
        nodes = {}
        for j in range(k + 1):
            for i in range(k + 1):
                nodes[j * (k + 1) + i] = LocalPoint(i * bs, j * bs)
        edges = {}
        for j in range(k + 1):
            for i in range(k):
                a, b = j * (k + 1) + i, j * (k + 1) + i + 1
                edges[len(edges)] = straight_edge(len(edges), a, b, nodes[a], nodes[b])
        for j in range(k):
            for i in range(k + 1):
                a, b = j * (k + 1) + i, (j + 1) * (k + 1) + i
                edges[len(edges)] = straight_edge(len(edges), a, b, nodes[a], nodes[b])
    elif spec.name == "overpass":
        z = OVERPASS_CLEARANCE
        nodes = {
            0: LocalPoint(0, mid, 0.0),
            1: LocalPoint(ext, mid, 0.0),
            2: LocalPoint(mid, 0, z),
            3: LocalPoint(mid, ext, z),
        }
        edges = {
            0: straight_edge(0, 0, 1, nodes[0], nodes[1]),
            1: straight_edge(1, 2, 3, nodes[2], nodes[3]),
        }
    elif spec.name == "intersection":
        nodes = {
            0: LocalPoint(0, mid),
            1: LocalPoint(ext, mid),
            2: LocalPoint(mid, 0),
            3: LocalPoint(mid, ext),
            4: LocalPoint(mid, mid),
        }
        edges = {
            0: straight_edge(0, 0, 4, nodes[0], nodes[4]),
            1: straight_edge(1, 4, 1, nodes[4], nodes[1]),
            2: straight_edge(2, 2, 4, nodes[2], nodes[4]),
            3: straight_edge(3, 4, 3, nodes[4], nodes[3]),
        }
    else:  # tee
        nodes = {
            0: LocalPoint(0, 0),
            1: LocalPoint(ext, 0),
            2: LocalPoint(mid, 0),
            3: LocalPoint(mid, mid),
        }
        edges = {
            0: straight_edge(0, 0, 2, nodes[0], nodes[2]),
            1: straight_edge(1, 2, 1, nodes[2], nodes[1]),
            2: straight_edge(2, 2, 3, nodes[2], nodes[3]),
        }
    return RoadGraph(nodes, edges)


@dataclass(frozen=True)
class Route:
    """Node path over the ground truth plus the edges traversed between them."""

    nodes: tuple[int, ...]
    edges: tuple[int, ...]


def _adjacency(graph: RoadGraph) -> dict[int, list[tuple[int, float, int]]]:
    adj: dict[int, list[tuple[int, float, int]]] = {nid: [] for nid in graph.nodes}
    for eid in sorted(graph.edges):
        e = graph.edges[eid]
        if e.a == e.b:
            continue
        length = graph.edge_length(eid)
        adj[e.a].append((e.b, length, eid))
        adj[e.b].append((e.a, length, eid))
    return adj


def _shortest_path(graph: RoadGraph, adj, src: int, dst: int) -> Route | None:
    dist = {src: 0.0}
    prev: dict[int, tuple[int, int]] = {}
    heap = [(0.0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist.get(u, math.inf):
            continue
        if u == dst:
            break
        for v, w, eid in adj[u]:
            nd = d + w
            if nd < dist.get(v, math.inf) - 1e-12:
                dist[v] = nd
                prev[v] = (u, eid)
                heapq.heappush(heap, (nd, v))
    if dst not in dist:
        return None
    nodes = [dst]
    edges = []
    cur = dst
    while cur != src:
        cur, eid = prev[cur]
        nodes.append(cur)
        edges.append(eid)
    return Route(tuple(reversed(nodes)), tuple(reversed(edges)))


def _edge_direction(graph: RoadGraph, eid: int, from_node: int, at_start: bool) -> np.ndarray:
    e = graph.edges[eid]
    xy = e.xy()
    if e.b == from_node:
        xy = xy[::-1]
    cum = cum_arc_lengths(xy)
    if at_start:  # direction leaving from_node
        probe = point_at_arc(xy, cum, min(5.0, cum[-1]))
        vec = probe - xy[0]
    else:  # direction arriving at the far node
        probe = point_at_arc(xy, cum, max(cum[-1] - 5.0, 0.0))
        vec = xy[-1] - probe
    n = math.hypot(vec[0], vec[1])
    return vec / n if n else vec


def enumerate_routes(gt: RoadGraph, policy: str) -> list[Route]:
    """Deterministic route catalog for a ground-truth graph.

    ``all_shortest_paths``: one route per unordered node pair (reachable pairs
    only). ``per_edge_shuttle``: one route per edge. ``straight_through_only``:
    maximal chains from dead-end nodes that never turn more than 45 degrees at
    any node, so stacked-road crossings are never traversed as turns.
    """
    if policy == "per_edge_shuttle":
        routes = []
        for eid in sorted(gt.edges):
            e = gt.edges[eid]
            if e.a == e.b:
                continue
            routes.append(Route((e.a, e.b), (eid,)))
        return routes
    if policy == "all_shortest_paths":
        adj = _adjacency(gt)
        ids = sorted(gt.nodes)
        routes = []
        for i, u in enumerate(ids):
            for v in ids[i + 1 :]:
                r = _shortest_path(gt, adj, u, v)
                if r is not None:
                    routes.append(r)
        return routes
    if policy == "straight_through_only":
        adj = _adjacency(gt)
        routes = []
        seen: set[tuple[int, ...]] = set()
        for start in sorted(gt.nodes):
            if len(adj[start]) != 1:
                continue
            node = start
            _, _, eid = adj[start][0]
            nodes = [start]
            edges = []
            while True:
                edges.append(eid)
                node = gt.other_end(eid, node)
                nodes.append(node)
                incoming = _edge_direction(gt, eid, gt.other_end(eid, node), at_start=False)
                options = []
                for nxt, _, cand in adj[node]:
                    if cand == eid:
                        continue
                    out = _edge_direction(gt, cand, node, at_start=True)
                    turn = math.degrees(
                        math.acos(min(1.0, max(-1.0, float(incoming @ out))))
                    )
                    options.append((turn, cand, nxt))
                options.sort()
                if not options or options[0][0] > STRAIGHT_THROUGH_MAX_TURN:
                    break
                eid = options[0][1]
                if eid in edges:  # cycle guard
                    break
            key = tuple(nodes)
            if key[::-1] not in seen:
                seen.add(key)
                routes.append(Route(key, tuple(edges)))
        return routes
    raise InvalidInputError(f"unknown route policy {policy!r}")


def _route_geometry(gt: RoadGraph, route: Route) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Concatenated XYZ polyline of a route plus per-edge cumulative end positions."""
    pts: list[tuple[float, float, float]] = []
    ends: list[float] = []
    total = 0.0
    for nid, eid in zip(route.nodes[:-1], route.edges):
        e = gt.edges[eid]
        poly = list(e.polyline) if e.a == nid else list(e.polyline)[::-1]
        seg = [(p.x, p.y, p.z) for p in poly]
        if pts:
            seg = seg[1:]
        pts.extend(seg)
        xy = np.array([(p.x, p.y) for p in poly])
        total += float(cum_arc_lengths(xy)[-1])
        ends.append(total)
    arr = np.array(pts)
    cum = cum_arc_lengths(arr[:, :2])
    return arr, cum, ends


def sample_traces(
    gt: RoadGraph,
    n_per_route: int | Sequence[int],
    noise: NoiseModel,
    route_policy: str = "all_shortest_paths",
    seed: int = 0,
) -> tuple[tuple[GnssTrace, ...], TraceOracle]:
    """Sample noisy traces along routes over the ground truth.

    ``n_per_route`` may be a single count or one count per enumerated route
    (used to build deliberately uneven coverage). Returns the traces plus an
    oracle recording the true edge under every point.
    """
    routes = enumerate_routes(gt, route_policy)
    if isinstance(n_per_route, int):
        if n_per_route < 0:
            raise InvalidInputError("n_per_route must be >= 0")
        counts = [n_per_route] * len(routes)
    else:
        counts = [int(c) for c in n_per_route]
        if any(c < 0 for c in counts):
            raise InvalidInputError("n_per_route counts must be >= 0")
        if len(counts) != len(routes):
            raise InvalidInputError(
                f"got {len(counts)} per-route counts for {len(routes)} routes"
            )

    rng = np.random.default_rng(seed)
    traces: list[GnssTrace] = []
    oracle: dict[str, tuple[int, ...]] = {}
    for ri, (route, count) in enumerate(zip(routes, counts)):
        xyz, cum, ends = _route_geometry(gt, route)
        total = cum[-1]
        positions = np.arange(0.0, total + 1e-9, noise.point_spacing)
        base = np.array([point_at_arc(xyz[:, :2], cum, s) for s in positions])
        zs = np.interp(positions, cum, xyz[:, 2])
        # A position exactly on an edge boundary belongs to the preceding edge.
        edge_ids = tuple(
            route.edges[min(bisect_left(ends, s - 1e-9), len(route.edges) - 1)]
            for s in positions
        )
        for ti in range(count):
            pts = base.copy()
            if noise.bias_sigma > 0:
                n_knots = int(math.ceil(total / noise.bias_correlation_length)) + 1
                knot_pos = np.arange(n_knots + 1) * noise.bias_correlation_length
                knots = rng.normal(0.0, noise.bias_sigma, (n_knots + 1, 2))
                norms = np.hypot(knots[:, 0], knots[:, 1])
                cap = 6.0 * noise.bias_sigma
                over = norms > cap
                knots[over] *= (cap / norms[over])[:, None]
                pts[:, 0] += np.interp(positions, knot_pos, knots[:, 0])
                pts[:, 1] += np.interp(positions, knot_pos, knots[:, 1])
            if noise.white_sigma > 0:
                pts += rng.normal(0.0, noise.white_sigma, pts.shape)
            trace_id = f"r{ri:03d}t{ti:03d}"
            points = tuple(
                LocalPoint(float(x), float(y), float(z)) for (x, y), z in zip(pts, zs)
            )
            traces.append(GnssTrace(trace_id, points))
            oracle[trace_id] = edge_ids
    return tuple(traces), TraceOracle(oracle)


def emit_semantic_points(
    gt: RoadGraph,
    traces: Sequence[GnssTrace],
    oracle: TraceOracle,
    spec: ScenarioSpec,
    noise: NoiseModel,
    seed: int = 0,
) -> tuple[SemanticPoint, ...]:
    """Sparse lane-marking / road-boundary points flanking the driven centerline.

    For each trace point, each side independently emits a RoadBoundary point at
    +/- lane_width and a LaneMarking point at +/- lane_width/2 from the true
    centerline (survival probability 1 - dropout_prob each), jittered with
    white noise at half the trace sigma.
    """
    rng = np.random.default_rng(seed)
    edge_geom: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for eid, e in gt.edges.items():
        xy = e.xy()
        edge_geom[eid] = (xy, cum_arc_lengths(xy))
    out: list[SemanticPoint] = []
    offsets = (
        (SemanticClass.ROAD_BOUNDARY, spec.lane_width),
        (SemanticClass.LANE_MARKING, spec.lane_width / 2.0),
    )
    sigma = noise.white_sigma / 2.0
    for trace in traces:
        edge_ids = oracle.for_trace(trace.trace_id)
        for point, eid in zip(trace.points, edge_ids):
            xy, cum = edge_geom[eid]
            _, arc, foot = project_to_polyline(xy, cum, np.array([point.x, point.y]))
            ahead = point_at_arc(xy, cum, min(arc + 0.5, cum[-1]))
            behind = point_at_arc(xy, cum, max(arc - 0.5, 0.0))
            tangent = ahead - behind
            norm = math.hypot(tangent[0], tangent[1])
            if norm == 0:
                continue
            normal = np.array([-tangent[1], tangent[0]]) / norm
            for side in (1.0, -1.0):
                for cls, off in offsets:
                    if rng.random() < noise.dropout_prob:
                        continue
                    pos = foot + side * off * normal
                    if sigma > 0:
                        pos = pos + rng.normal(0.0, sigma, 2)
                    out.append(SemanticPoint(LocalPoint(float(pos[0]), float(pos[1]), point.z), cls))
    return tuple(out)
