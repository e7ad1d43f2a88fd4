"""Georeferenced per-tile rasters: density rendering, normalization, mosaicking.

Rasters are row-major, y-up numpy grids: ``values[iy, ix]`` is the pixel whose
SW corner sits at ``origin + (ix, iy) * resolution``. Points map to pixels with
the half-open convention ``floor((p - origin) / resolution)`` so tile seams
never double-count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInputError
from .model import GnssTrace, LocalPoint, SemanticClass, SemanticPoint


class Channel(Enum):
    TRACE_DENSITY = 0
    LANE_MARKING = 1
    ROAD_BOUNDARY = 2
    PROBABILITY = 3
    LABEL = 4


UNIT_CHANNELS = (Channel.PROBABILITY, Channel.LABEL)


@dataclass(frozen=True, slots=True)
class TileSpec:
    """Geometry of one raster tile; ``origin`` is the SW corner."""

    origin: LocalPoint
    resolution: float = 1.0
    width_px: int = 1000
    height_px: int = 1000

    def __post_init__(self) -> None:
        if self.resolution <= 0:
            raise InvalidInputError(f"resolution must be > 0, got {self.resolution}")
        if self.width_px <= 0 or self.height_px <= 0:
            raise InvalidInputError("tile size must be positive")

    @property
    def width_m(self) -> float:
        return self.width_px * self.resolution

    @property
    def height_m(self) -> float:
        return self.height_px * self.resolution

    def pixel_of(self, x: float, y: float) -> tuple[int, int]:
        """Containing pixel (ix, iy); may be out of bounds."""
        return (
            math.floor((x - self.origin.x) / self.resolution),
            math.floor((y - self.origin.y) / self.resolution),
        )

    def contains_pixel(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width_px and 0 <= iy < self.height_px

    def pixel_center(self, ix: int, iy: int) -> tuple[float, float]:
        return (
            self.origin.x + (ix + 0.5) * self.resolution,
            self.origin.y + (iy + 0.5) * self.resolution,
        )


@dataclass(frozen=True)
class RasterTile:
    spec: TileSpec
    channel: Channel
    values: np.ndarray

    def __post_init__(self) -> None:
        v = self.values
        if v.shape != (self.spec.height_px, self.spec.width_px):
            raise InvalidInputError(
                f"values shape {v.shape} does not match tile {self.spec.height_px}x{self.spec.width_px}"
            )
        if v.size and float(v.min()) < 0:
            raise InvalidInputError("raster values must be non-negative")
        if self.channel in UNIT_CHANNELS and v.size and float(v.max()) > 1.0 + 1e-12:
            raise InvalidInputError(f"{self.channel.name} values must lie in [0, 1]")

    def zeros_like(self, channel: Channel | None = None) -> "RasterTile":
        return RasterTile(self.spec, channel or self.channel, np.zeros_like(self.values))


def zero_tile(spec: TileSpec, channel: Channel) -> RasterTile:
    return RasterTile(spec, channel, np.zeros((spec.height_px, spec.width_px)))


@dataclass(frozen=True)
class TileGrid:
    """Half-overlapping tile layout covering a bounding box."""

    template: TileSpec
    origins: tuple[tuple[float, float], ...]

    @property
    def tiles(self) -> tuple[TileSpec, ...]:
        t = self.template
        return tuple(
            TileSpec(LocalPoint(ox, oy), t.resolution, t.width_px, t.height_px)
            for ox, oy in self.origins
        )


def plan_tiles(bbox: tuple[LocalPoint, LocalPoint], template: TileSpec) -> TileGrid:
    """Minimal set of 50%-overlapping tiles whose union covers ``bbox``."""
    lo, hi = bbox
    ext_x = hi.x - lo.x
    ext_y = hi.y - lo.y
    if ext_x <= 0 or ext_y <= 0:
        raise InvalidInputError(f"degenerate bbox: {lo.xy()} .. {hi.xy()}")

    def count(extent: float, tile: float) -> int:
        step = tile / 2.0
        return max(1, math.ceil((extent - tile) / step - 1e-9) + 1)

    nx = count(ext_x, template.width_m)
    ny = count(ext_y, template.height_m)
    origins = tuple(
        (lo.x + ix * template.width_m / 2.0, lo.y + iy * template.height_m / 2.0)
        for iy in range(ny)
        for ix in range(nx)
    )
    return TileGrid(template, origins)


def _bresenham_into(grid: np.ndarray, x0: int, y0: int, x1: int, y1: int) -> None:
    """Walk pixels from (x0,y0) up to but excluding (x1,y1), incrementing counts."""
    h, w = grid.shape
    dx = abs(x1 - x0)
    dy = abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx - dy
    while x0 != x1 or y0 != y1:
        if 0 <= x0 < w and 0 <= y0 < h:
            grid[y0, x0] += 1
        e2 = 2 * err
        if e2 > -dy:
            err -= dy
            x0 += sx
        if e2 < dx:
            err += dx
            y0 += sy


def bresenham_pixels(x0: int, y0: int, x1: int, y1: int) -> list[tuple[int, int]]:
    """Pixel chain from (x0,y0) to (x1,y1) inclusive (used for label rendering)."""
    out = []
    dx = abs(x1 - x0)
    dy = abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx - dy
    while True:
        out.append((x0, y0))
        if x0 == x1 and y0 == y1:
            return out
        e2 = 2 * err
        if e2 > -dy:
            err -= dy
            x0 += sx
        if e2 < dx:
            err += dx
            y0 += sy


def rasterize_traces(traces: Iterable[GnssTrace], spec: TileSpec) -> RasterTile:
    """Count, per pixel, how often trace paths traverse it.

    Each consecutive point pair is drawn with Bresenham's line algorithm over
    the endpoint pixel coordinates; within a chain every pixel is counted once
    per traversal event (segments are drawn half-open, the final point closes
    the chain).
    """
    grid = np.zeros((spec.height_px, spec.width_px))
    res = spec.resolution
    w, h = spec.width_px, spec.height_px
    for trace in traces:
        xy = trace.xy()
        px = np.floor((xy[:, 0] - spec.origin.x) / res).astype(np.int64)
        py = np.floor((xy[:, 1] - spec.origin.y) / res).astype(np.int64)
        # Skip segments that cannot touch the tile.
        lo_x = np.minimum(px[:-1], px[1:])
        hi_x = np.maximum(px[:-1], px[1:])
        lo_y = np.minimum(py[:-1], py[1:])
        hi_y = np.maximum(py[:-1], py[1:])
        touch = (hi_x >= 0) & (lo_x < w) & (hi_y >= 0) & (lo_y < h)
        for i in np.nonzero(touch)[0]:
            _bresenham_into(grid, int(px[i]), int(py[i]), int(px[i + 1]), int(py[i + 1]))
        fx, fy = int(px[-1]), int(py[-1])
        if 0 <= fx < w and 0 <= fy < h:
            grid[fy, fx] += 1
    return RasterTile(spec, Channel.TRACE_DENSITY, grid)


_CLASS_CHANNEL = {
    SemanticClass.LANE_MARKING: Channel.LANE_MARKING,
    SemanticClass.ROAD_BOUNDARY: Channel.ROAD_BOUNDARY,
}


def rasterize_points(
    points: Iterable[SemanticPoint], semantic_class: SemanticClass, spec: TileSpec
) -> RasterTile:
    """Per-pixel count of in-tile semantic points of the given class."""
    grid = np.zeros((spec.height_px, spec.width_px))
    coords = np.array(
        [(p.position.x, p.position.y) for p in points if p.semantic_class == semantic_class]
    )
    if len(coords):
        ix = np.floor((coords[:, 0] - spec.origin.x) / spec.resolution).astype(np.int64)
        iy = np.floor((coords[:, 1] - spec.origin.y) / spec.resolution).astype(np.int64)
        keep = (ix >= 0) & (ix < spec.width_px) & (iy >= 0) & (iy < spec.height_px)
        np.add.at(grid, (iy[keep], ix[keep]), 1.0)
    return RasterTile(spec, _CLASS_CHANNEL[semantic_class], grid)


def normalize(tile: RasterTile) -> RasterTile:
    """log10(x + 1) squashing applied to every pixel; channel label preserved."""
    if tile.values.size and float(tile.values.min()) < 0:
        raise InvalidInputError("normalize requires non-negative values")
    return RasterTile(tile.spec, tile.channel, np.log10(tile.values + 1.0))


def tile_weights(spec: TileSpec) -> np.ndarray:
    """Blending weight per pixel: 1.0 at the tile center falling linearly to
    0.5 at the edges, constant along borders (Chebyshev profile)."""
    # Normalized pixel-center offsets from the tile center, in [-1, 1].
    dx = (2.0 * np.arange(spec.width_px) + 1.0 - spec.width_px) / spec.width_px
    dy = (2.0 * np.arange(spec.height_px) + 1.0 - spec.height_px) / spec.height_px
    cheb = np.maximum(np.abs(dx)[None, :], np.abs(dy)[:, None])
    return 1.0 - 0.5 * cheb


def merge_tiles(masks: Sequence[RasterTile]) -> RasterTile:
    """Blend overlapping probability masks into one mosaic by weighted average."""
    if not masks:
        raise InvalidInputError("merge_tiles needs at least one mask")
    # Fixed accumulation order makes the mosaic independent of enumeration order.
    masks = sorted(masks, key=lambda m: (m.spec.origin.y, m.spec.origin.x))
    res = masks[0].spec.resolution
    for m in masks:
        if m.channel != Channel.PROBABILITY:
            raise InvalidInputError(f"merge_tiles expects Probability tiles, got {m.channel.name}")
        if m.spec.resolution != res:
            raise InvalidInputError("merge_tiles requires a uniform resolution")

    min_x = min(m.spec.origin.x for m in masks)
    min_y = min(m.spec.origin.y for m in masks)
    max_x = max(m.spec.origin.x + m.spec.width_m for m in masks)
    max_y = max(m.spec.origin.y + m.spec.height_m for m in masks)
    width = int(round((max_x - min_x) / res))
    height = int(round((max_y - min_y) / res))
    out_spec = TileSpec(LocalPoint(min_x, min_y), res, width, height)

    acc = np.zeros((height, width))
    wsum = np.zeros((height, width))
    for m in masks:
        off_x = (m.spec.origin.x - min_x) / res
        off_y = (m.spec.origin.y - min_y) / res
        ox, oy = round(off_x), round(off_y)
        if abs(off_x - ox) > 1e-6 or abs(off_y - oy) > 1e-6:
            raise InvalidInputError("tile origins must lie on the shared pixel grid")
        w = tile_weights(m.spec)
        acc[oy : oy + m.spec.height_px, ox : ox + m.spec.width_px] += w * m.values
        wsum[oy : oy + m.spec.height_px, ox : ox + m.spec.width_px] += w
    covered = wsum > 0
    mosaic = np.zeros((height, width))
    mosaic[covered] = acc[covered] / wsum[covered]
    return RasterTile(out_spec, Channel.PROBABILITY, mosaic)
