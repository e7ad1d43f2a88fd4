"""Skeleton vectorization and rule-based graph cleaning.

``vectorize`` walks a one-pixel-wide skeleton into a node/edge graph; the
cleaning passes then remove the artifacts thinning is known to produce:
short junction-to-junction stubs, noise spurs, and redundant degree-2 nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .geometry import cum_arc_lengths, point_at_arc
from .model import Edge, LocalPoint, Provenance, RoadGraph
from .skeleton import SkeletonMask, is_thin


@dataclass(frozen=True, slots=True)
class CleaningConfig:
    min_dead_end_len: float = 15.0
    collapse_edge_len: float = 10.0

    def __post_init__(self) -> None:
        if self.min_dead_end_len < 0 or self.collapse_edge_len < 0:
            raise InvalidInputError("cleaning thresholds must be >= 0")


_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


def _drop_collinear(pixels: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Remove interior pixels lying on straight runs; endpoints always kept."""
    if len(pixels) <= 2:
        return pixels
    out = [pixels[0]]
    for prev, cur, nxt in zip(pixels, pixels[1:], pixels[2:]):
        if (cur[0] - prev[0], cur[1] - prev[1]) != (nxt[0] - cur[0], nxt[1] - cur[1]):
            out.append(cur)
    out.append(pixels[-1])
    return out


def vectorize(skel: SkeletonMask) -> RoadGraph:
    """Convert a thin skeleton into a geospatial graph.

    Nodes sit at pixels with != 2 skeleton neighbors (8-connectivity); edges
    are the maximal pixel paths between them, emitted as polylines through
    pixel centers. Isolated cycles keep a single anchor node.
    """
    mask = skel.values
    if not is_thin(mask):
        raise InvalidInputError("vectorize requires a thin skeleton")
    spec = skel.spec
    h, w = mask.shape

    neighbor_count = np.zeros((h, w), dtype=np.int8)
    for dy, dx in _OFFSETS:
        shifted = np.zeros((h, w), dtype=bool)
        ys = slice(max(0, dy), h + min(0, dy))
        xs = slice(max(0, dx), w + min(0, dx))
        ys_src = slice(max(0, -dy), h + min(0, -dy))
        xs_src = slice(max(0, -dx), w + min(0, -dx))
        shifted[ys, xs] = mask[ys_src, xs_src]
        neighbor_count += shifted & mask
    neighbor_count[~mask] = -1

    def neighbors(py: int, px: int) -> list[tuple[int, int]]:
        out = []
        for dy, dx in _OFFSETS:
            qy, qx = py + dy, px + dx
            if 0 <= qy < h and 0 <= qx < w and mask[qy, qx]:
                out.append((qy, qx))
        return out

    node_pixels = sorted(map(tuple, np.argwhere(mask & (neighbor_count != 2))))
    node_id_of = {p: i for i, p in enumerate(node_pixels)}

    def world(p: tuple[int, int]) -> LocalPoint:
        x, y = spec.pixel_center(p[1], p[0])
        return LocalPoint(x, y, 0.0)

    nodes = {i: world(p) for p, i in node_id_of.items()}
    edges: dict[int, Edge] = {}
    used_steps: set[tuple[tuple[int, int], tuple[int, int]]] = set()

    def emit(path: list[tuple[int, int]]) -> None:
        poly = tuple(world(p) for p in _drop_collinear(path))
        a = node_id_of[path[0]]
        b = node_id_of[path[-1]]
        edges[len(edges)] = Edge(a, b, poly, Provenance.SEGMENTATION)

    for p in node_pixels:
        for q in sorted(neighbors(*p)):
            if (p, q) in used_steps:
                continue
            path = [p, q]
            used_steps.add((p, q))
            used_steps.add((q, p))
            while q not in node_id_of:
                nxt = [r for r in neighbors(*q) if r != path[-2]]
                r = nxt[0]
                used_steps.add((q, r))
                used_steps.add((r, q))
                path.append(r)
                q = r
            emit(path)

    # Remaining untouched pixels with exactly two neighbors form pure cycles.
    visited = {p for step in used_steps for p in step} | set(node_pixels)
    cycle_pixels = sorted(map(tuple, np.argwhere(mask & (neighbor_count == 2))))
    for p in cycle_pixels:
        if p in visited:
            continue
        anchor_id = len(nodes)
        node_id_of[p] = anchor_id
        nodes[anchor_id] = world(p)
        q = sorted(neighbors(*p))[0]
        path = [p, q]
        visited.add(p)
        visited.add(q)
        while q != p:
            nxt = [r for r in neighbors(*q) if r != path[-2]]
            q = nxt[0]
            path.append(q)
            visited.add(q)
        emit(path)

    return RoadGraph(nodes, edges)


def _oriented(edge: Edge, start_node: int) -> list[LocalPoint]:
    """Edge polyline as a list running away from ``start_node``."""
    pts = list(edge.polyline)
    return pts if edge.a == start_node else pts[::-1]


def _merge_provenance(a: Provenance, b: Provenance) -> Provenance:
    if Provenance.GAP_FILL in (a, b):
        return Provenance.GAP_FILL
    if a == b:
        return a
    return Provenance.SEGMENTATION


def collapse_short_junction_edges(graph: RoadGraph, config: CleaningConfig) -> RoadGraph:
    """Contract short junction-to-junction edges (skeletonization artifacts).

    Shortest qualifying edge first, repeated to fixpoint; the merged node sits
    at the contracted edge's arc-length midpoint and incident polylines are
    re-anchored onto it.
    """
    nodes = dict(graph.nodes)
    edges = dict(graph.edges)

    def build() -> RoadGraph:
        return RoadGraph(nodes, edges)

    while True:
        g = build()
        candidates = [
            (g.edge_length(eid), eid)
            for eid, e in edges.items()
            if e.a != e.b
            and g.edge_length(eid) < config.collapse_edge_len
            and g.degree(e.a) >= 3
            and g.degree(e.b) >= 3
        ]
        if not candidates:
            return g
        _, eid = min(candidates)
        victim = edges.pop(eid)
        xy = victim.xy()
        cum = cum_arc_lengths(xy)
        mx, my = point_at_arc(xy, cum, cum[-1] / 2.0)
        merged_id = max(nodes) + 1
        merged = LocalPoint(float(mx), float(my), nodes[victim.a].z)
        nodes[merged_id] = merged
        for other_id, edge in list(edges.items()):
            a, b, poly = edge.a, edge.b, list(edge.polyline)
            touched = False
            if a in (victim.a, victim.b):
                a = merged_id
                poly.insert(0, merged)
                touched = True
            if b in (victim.a, victim.b):
                b = merged_id
                poly.append(merged)
                touched = True
            if touched:
                edges[other_id] = Edge(a, b, tuple(poly), edge.provenance)
        del nodes[victim.a]
        del nodes[victim.b]


def prune_dead_ends(graph: RoadGraph, config: CleaningConfig) -> RoadGraph:
    """Drop short noise spurs: edges hanging off a junction onto a dead end.

    Isolated two-node segments survive (the junction-side endpoint must have
    degree >= 3), so lone roads are never erased.
    """
    nodes = dict(graph.nodes)
    edges = dict(graph.edges)
    while True:
        g = RoadGraph(nodes, edges)
        doomed = [
            eid
            for eid, e in edges.items()
            if e.a != e.b
            and g.edge_length(eid) < config.min_dead_end_len
            and sorted((g.degree(e.a), g.degree(e.b)))[0] == 1
            and sorted((g.degree(e.a), g.degree(e.b)))[1] >= 3
        ]
        if not doomed:
            return g
        for eid in doomed:
            e = edges.pop(eid)
            for nid in (e.a, e.b):
                if not any(nid in (o.a, o.b) for o in edges.values()):
                    del nodes[nid]


def simplify_degree2(graph: RoadGraph) -> RoadGraph:
    """Eliminate degree-2 nodes by concatenating their two edges.

    Pure cycles keep one anchor node so geometry survives without inventing
    intersections.
    """
    nodes = dict(graph.nodes)
    edges = dict(graph.edges)
    while True:
        g = RoadGraph(nodes, edges)
        target = None
        for nid in sorted(nodes):
            inc = sorted(g.incident_edges(nid))
            if len(inc) != 2 or g.degree(nid) != 2:
                continue
            e1, e2 = edges[inc[0]], edges[inc[1]]
            if e1.a == e1.b or e2.a == e2.b:
                continue
            target = (nid, inc[0], inc[1])
            break
        if target is None:
            return g
        nid, id1, id2 = target
        e1, e2 = edges.pop(id1), edges.pop(id2)
        a = e1.b if e1.a == nid else e1.a
        b = e2.b if e2.a == nid else e2.a
        half1 = _oriented(e1, a)  # a .. nid
        half2 = _oriented(e2, nid)  # nid .. b
        poly = tuple(half1 + half2[1:])
        new_id = max(list(edges) + [id1, id2]) + 1
        edges[new_id] = Edge(a, b, poly, _merge_provenance(e1.provenance, e2.provenance))
        del nodes[nid]
