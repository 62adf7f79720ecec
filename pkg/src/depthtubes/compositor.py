"""Pairwise depth compositing of worker tiles.

The winner of each pixel is the lexicographic minimum of (depth, provenance).
Depth alone is not a total order: two workers can land fragments at the exact
same float32 depth, and distinct worker ids then break the tie the same way
regardless of arrival order.  That makes the pairwise combine associative and
commutative, so the master can fold tiles eagerly as they arrive.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .raster import FrameTile


def _check_compatible(a: FrameTile, b: FrameTile) -> None:
    if (a.width, a.height) != (b.width, b.height):
        raise ValueError(
            f"tile dimensions differ: {a.width}x{a.height} vs {b.width}x{b.height}"
        )


def _winner_mask(acc: FrameTile, incoming: FrameTile) -> np.ndarray:
    """Boolean mask of pixels where the incoming tile wins."""
    return (incoming.depth < acc.depth) | (
        (incoming.depth == acc.depth) & (incoming.provenance < acc.provenance)
    )


def composite_pair(acc: FrameTile, incoming: FrameTile) -> FrameTile:
    """Pure pairwise composite: returns a fresh tile, inputs untouched."""
    _check_compatible(acc, incoming)
    out = acc.copy()
    composite_into(out, incoming)
    return out


def composite_into(acc: FrameTile, incoming: FrameTile) -> FrameTile:
    """Fold `incoming` into `acc` in place (the master's eager merge path)."""
    _check_compatible(acc, incoming)
    take = _winner_mask(acc, incoming)
    acc.color[take] = incoming.color[take]
    acc.depth[take] = incoming.depth[take]
    acc.provenance[take] = incoming.provenance[take]
    return acc


def composite_all(tiles: Sequence[FrameTile] | Iterable[FrameTile]) -> FrameTile:
    """Left fold of composite_pair over one or more tiles."""
    it = iter(tiles)
    try:
        first = next(it)
    except StopIteration:
        raise ValueError("composite_all needs at least one tile") from None
    acc = first.copy()
    for tile in it:
        composite_into(acc, tile)
    return acc
