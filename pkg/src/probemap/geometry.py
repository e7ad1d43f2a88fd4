"""Small 2D polyline geometry helpers used by sampling, matching, and refinement.

All functions work on XY numpy arrays of shape (k, 2); elevation is handled by
callers where it matters.
"""

from __future__ import annotations

import math

import numpy as np


def cum_arc_lengths(xy: np.ndarray) -> np.ndarray:
    """Per-vertex arc-length positions along a polyline, starting at 0."""
    if len(xy) < 2:
        return np.zeros(len(xy))
    seg = np.hypot(np.diff(xy[:, 0]), np.diff(xy[:, 1]))
    return np.concatenate(([0.0], np.cumsum(seg)))


def polyline_length(xy: np.ndarray) -> float:
    return float(cum_arc_lengths(xy)[-1]) if len(xy) >= 2 else 0.0


def point_at_arc(xy: np.ndarray, cum: np.ndarray, s: float) -> np.ndarray:
    """Point at arc position ``s`` (clamped to [0, length])."""
    total = cum[-1]
    s = min(max(s, 0.0), total)
    i = int(np.searchsorted(cum, s, side="right")) - 1
    i = min(max(i, 0), len(xy) - 2)
    seg_len = cum[i + 1] - cum[i]
    f = 0.0 if seg_len <= 0 else (s - cum[i]) / seg_len
    return xy[i] + f * (xy[i + 1] - xy[i])


def project_to_polyline(xy: np.ndarray, cum: np.ndarray, p: np.ndarray) -> tuple[float, float, np.ndarray]:
    """Project point ``p`` onto a polyline.

    Returns (distance, arc position of the foot point, foot point).
    """
    a = xy[:-1]
    b = xy[1:]
    d = b - a
    seg_sq = np.einsum("ij,ij->i", d, d)
    t = np.zeros(len(a))
    nz = seg_sq > 0
    t[nz] = np.einsum("ij,ij->i", p - a[nz], d[nz]) / seg_sq[nz]
    t = np.clip(t, 0.0, 1.0)
    feet = a + t[:, None] * d
    dist = np.hypot(feet[:, 0] - p[0], feet[:, 1] - p[1])
    i = int(np.argmin(dist))
    arc = cum[i] + t[i] * math.sqrt(seg_sq[i]) if seg_sq[i] > 0 else cum[i]
    return float(dist[i]), float(arc), feet[i]


def clip_polyline(xy: np.ndarray, cum: np.ndarray, s0: float, s1: float) -> np.ndarray:
    """Sub-polyline covering arc interval [s0, s1] (clamped, s0 < s1)."""
    total = cum[-1]
    s0 = max(0.0, min(s0, total))
    s1 = max(0.0, min(s1, total))
    if s1 <= s0:
        return np.empty((0, 2))
    start = point_at_arc(xy, cum, s0)
    end = point_at_arc(xy, cum, s1)
    interior = [i for i in range(len(xy)) if s0 < cum[i] < s1]
    pts = [start] + [xy[i] for i in interior] + [end]
    out = [pts[0]]
    for q in pts[1:]:
        if not np.allclose(q, out[-1], atol=1e-12):
            out.append(q)
    if len(out) < 2:
        return np.empty((0, 2))
    return np.asarray(out)


def terminal_direction(xy: np.ndarray, at_start: bool, window: float = 5.0) -> np.ndarray:
    """Unit direction of travel into a polyline terminus.

    Averaged over the last ``window`` meters to damp pixel jitter. For the
    start terminus the returned vector points from the polyline interior
    toward the first vertex; for the end terminus toward the last vertex.
    """
    cum = cum_arc_lengths(xy)
    total = cum[-1]
    w = min(window, total)
    if at_start:
        back = point_at_arc(xy, cum, min(w, total))
        vec = xy[0] - back
    else:
        back = point_at_arc(xy, cum, max(total - w, 0.0))
        vec = xy[-1] - back
    n = math.hypot(vec[0], vec[1])
    if n == 0:  # degenerate window; fall back to the adjacent segment
        vec = xy[0] - xy[1] if at_start else xy[-1] - xy[-2]
        n = math.hypot(vec[0], vec[1])
    return vec / n


def angle_deg(u: np.ndarray, v: np.ndarray) -> float:
    """Unsigned angle between two vectors in degrees."""
    nu = math.hypot(u[0], u[1])
    nv = math.hypot(v[0], v[1])
    if nu == 0 or nv == 0:
        return 0.0
    c = (u[0] * v[0] + u[1] * v[1]) / (nu * nv)
    return math.degrees(math.acos(min(1.0, max(-1.0, c))))


def ray_segment_intersection(
    origin: np.ndarray, direction: np.ndarray, a: np.ndarray, b: np.ndarray
) -> tuple[float, float] | None:
    """Intersect ray origin + s*direction (s >= 0) with segment a->b.

    Returns (s, u) where u in [0, 1] parameterizes the segment, or None.
    """
    d = direction
    e = b - a
    denom = d[0] * e[1] - d[1] * e[0]
    if abs(denom) < 1e-12:
        return None
    w = a - origin
    s = (w[0] * e[1] - w[1] * e[0]) / denom
    u = (w[0] * d[1] - w[1] * d[0]) / denom
    if s < 0 or u < 0 or u > 1:
        return None
    return float(s), float(u)
