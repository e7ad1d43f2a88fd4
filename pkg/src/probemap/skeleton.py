"""Binary-mask thinning: Guo-Hall and Zhang-Suen, iterated to fixpoint.

Both operate on boolean grids and preserve 8-connectivity of the foreground.
The neighborhood is labeled clockwise:

    P9 P2 P3
    P8 P1 P4
    P7 P6 P5

with P2 one row up. Passes are fully vectorized: each subiteration computes a
deletion mask from shifted copies of the image and applies it simultaneously.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .raster import Channel, RasterTile, TileSpec


@dataclass(frozen=True)
class SkeletonMask:
    """One-pixel-wide binary skeleton over a tile extent."""

    spec: TileSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.dtype != bool:
            raise InvalidInputError("skeleton values must be boolean")
        if not is_thin(self.values):
            raise InvalidInputError("skeleton contains a 2x2 foreground block")


def is_thin(mask: np.ndarray) -> bool:
    """True if no 2x2 block is fully foreground."""
    if mask.shape[0] < 2 or mask.shape[1] < 2:
        return True
    blocks = mask[:-1, :-1] & mask[1:, :-1] & mask[:-1, 1:] & mask[1:, 1:]
    return not bool(blocks.any())


def _neighborhood(img: np.ndarray) -> tuple[np.ndarray, ...]:
    p = np.pad(img, 1, constant_values=False)
    p2 = p[:-2, 1:-1]
    p3 = p[:-2, 2:]
    p4 = p[1:-1, 2:]
    p5 = p[2:, 2:]
    p6 = p[2:, 1:-1]
    p7 = p[2:, :-2]
    p8 = p[1:-1, :-2]
    p9 = p[:-2, :-2]
    return p2, p3, p4, p5, p6, p7, p8, p9


def _guo_hall_delete(img: np.ndarray, second: bool) -> np.ndarray:
    p2, p3, p4, p5, p6, p7, p8, p9 = _neighborhood(img)
    c = (
        (~p2 & (p3 | p4)).astype(np.uint8)
        + (~p4 & (p5 | p6)).astype(np.uint8)
        + (~p6 & (p7 | p8)).astype(np.uint8)
        + (~p8 & (p9 | p2)).astype(np.uint8)
    )
    n1 = (p9 | p2).astype(np.uint8) + (p3 | p4).astype(np.uint8) + (p5 | p6).astype(np.uint8) + (p7 | p8).astype(np.uint8)
    n2 = (p2 | p3).astype(np.uint8) + (p4 | p5).astype(np.uint8) + (p6 | p7).astype(np.uint8) + (p8 | p9).astype(np.uint8)
    n = np.minimum(n1, n2)
    if second:
        m = (p2 | p3 | ~p5) & p4
    else:
        m = (p6 | p7 | ~p9) & p8
    return img & (c == 1) & (n >= 2) & (n <= 3) & ~m


def _crossing_number(img: np.ndarray, y: int, x: int) -> int:
    """Hilditch crossing number of the 8-neighborhood of (y, x)."""
    h, w = img.shape

    def at(yy: int, xx: int) -> bool:
        return bool(img[yy, xx]) if 0 <= yy < h and 0 <= xx < w else False

    p2 = at(y - 1, x)
    p3 = at(y - 1, x + 1)
    p4 = at(y, x + 1)
    p5 = at(y + 1, x + 1)
    p6 = at(y + 1, x)
    p7 = at(y + 1, x - 1)
    p8 = at(y, x - 1)
    p9 = at(y - 1, x - 1)
    return (
        int(not p2 and (p3 or p4))
        + int(not p4 and (p5 or p6))
        + int(not p6 and (p7 or p8))
        + int(not p8 and (p9 or p2))
    )


def _resolve_blocks(img: np.ndarray) -> bool:
    """Break residual 2x2 foreground blocks by deleting simple points.

    The subiteration rules occasionally stall with a thick 2x2 knot (a known
    Zhang-Suen artifact at diagonal crossings). Deleting a pixel whose crossing
    number is 1 preserves local 8-connectivity, so this never splits or merges
    components. Returns True if any pixel was removed.
    """
    removed = False
    while True:
        blocks = np.argwhere(img[:-1, :-1] & img[1:, :-1] & img[:-1, 1:] & img[1:, 1:])
        if len(blocks) == 0:
            return removed
        progressed = False
        for y, x in blocks:
            if not (img[y, x] and img[y + 1, x] and img[y, x + 1] and img[y + 1, x + 1]):
                continue
            for py, px in ((y, x), (y, x + 1), (y + 1, x), (y + 1, x + 1)):
                if _crossing_number(img, py, px) == 1:
                    img[py, px] = False
                    progressed = removed = True
                    break
        if not progressed:
            return removed


def _thin_to_fixpoint(mask: np.ndarray, delete_fn) -> np.ndarray:
    img = mask.astype(bool).copy()
    while True:
        changed = False
        for second in (False, True):
            kill = delete_fn(img, second)
            if kill.any():
                img &= ~kill
                changed = True
        if not changed:
            if not _resolve_blocks(img):
                return img


def thin_guo_hall(mask: np.ndarray) -> np.ndarray:
    """Guo-Hall two-subiteration thinning to fixpoint."""
    return _thin_to_fixpoint(mask, _guo_hall_delete)


def _zhang_suen_delete(img: np.ndarray, second: bool) -> np.ndarray:
    p2, p3, p4, p5, p6, p7, p8, p9 = _neighborhood(img)
    ring = (p2, p3, p4, p5, p6, p7, p8, p9, p2)
    a = np.zeros(img.shape, dtype=np.uint8)
    for q, r in zip(ring[:-1], ring[1:]):
        a += (~q & r).astype(np.uint8)
    b = sum(q.astype(np.uint8) for q in ring[:-1])
    if second:
        cond = (~(p2 & p4 & p8)) & (~(p2 & p6 & p8))
    else:
        cond = (~(p2 & p4 & p6)) & (~(p4 & p6 & p8))
    return img & (a == 1) & (b >= 2) & (b <= 6) & cond


def thin_zhang_suen(mask: np.ndarray) -> np.ndarray:
    """Zhang-Suen two-subiteration thinning to fixpoint."""
    return _thin_to_fixpoint(mask, _zhang_suen_delete)


def _to_binary(tile: RasterTile) -> np.ndarray:
    return tile.values > 0.5


def skeletonize_guo_hall(tile: RasterTile) -> SkeletonMask:
    return SkeletonMask(tile.spec, thin_guo_hall(_to_binary(tile)))


def skeletonize_zhang_suen(tile: RasterTile) -> SkeletonMask:
    return SkeletonMask(tile.spec, thin_zhang_suen(_to_binary(tile)))


def label_components(mask: np.ndarray) -> int:
    """Count of 8-connected foreground components (used by invariant checks)."""
    from scipy import ndimage

    _, count = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    return int(count)
