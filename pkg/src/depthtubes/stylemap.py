"""Rank-driven visual-variable mappings: tube radius, color, value, transparency.

The mapping domain is the integer global depth rank 0..rank_max (0 = nearest
vertex), not the raw depth, so the visual spread is uniform no matter how the
depths are distributed.  Each enabled variable maps rank linearly onto its own
range; multiple enabled variables are independent single mappings evaluated
side by side.

Orientation controls which end of a range the nearest vertex receives:
"near-max" reverses the rank first (rank 0 lands on the range maximum and, for
color, on near_color).  Evaluation uses the two-sided lerp form so the range
endpoints are reproduced exactly at rank 0 and rank_max.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass, field

import numpy as np

VARIABLES = ("size", "color", "value", "alpha")

NEAR_MAX = "near-max"
NEAR_MIN = "near-min"


def _as_rgb(c) -> np.ndarray:
    rgb = np.asarray(c, dtype=np.float64).reshape(3)
    if np.any(rgb < 0.0) or np.any(rgb > 1.0):
        raise ValueError(f"color channels must lie in [0, 1], got {rgb}")
    return rgb


@dataclass(frozen=True)
class MappingSpec:
    """Which visual variables depth rank drives, and over what ranges."""

    enabled: frozenset = frozenset({"color"})
    radius_range: tuple[float, float] = (0.002, 0.008)
    near_color: np.ndarray = field(default_factory=lambda: np.array([0.95, 0.42, 0.12]))
    far_color: np.ndarray = field(default_factory=lambda: np.array([0.10, 0.22, 0.80]))
    value_range: tuple[float, float] = (0.25, 1.0)
    alpha_range: tuple[float, float] = (0.15, 1.0)
    orientation: str = NEAR_MAX

    def __post_init__(self):
        enabled = frozenset(self.enabled)
        unknown = enabled - set(VARIABLES)
        if unknown:
            raise ValueError(f"unknown visual variables: {sorted(unknown)}")
        rlo, rhi = (float(v) for v in self.radius_range)
        if not 0.0 < rlo <= rhi:
            raise ValueError(f"radius range must satisfy 0 < min <= max, got {self.radius_range}")
        vlo, vhi = (float(v) for v in self.value_range)
        if not 0.0 <= vlo <= vhi <= 1.0:
            raise ValueError(f"value range must be ordered within [0, 1], got {self.value_range}")
        alo, ahi = (float(v) for v in self.alpha_range)
        if not 0.0 <= alo <= ahi <= 1.0:
            raise ValueError(f"alpha range must be ordered within [0, 1], got {self.alpha_range}")
        if self.orientation not in (NEAR_MAX, NEAR_MIN):
            raise ValueError(f"orientation must be {NEAR_MAX!r} or {NEAR_MIN!r}")
        object.__setattr__(self, "enabled", enabled)
        object.__setattr__(self, "radius_range", (rlo, rhi))
        object.__setattr__(self, "value_range", (vlo, vhi))
        object.__setattr__(self, "alpha_range", (alo, ahi))
        object.__setattr__(self, "near_color", _as_rgb(self.near_color))
        object.__setattr__(self, "far_color", _as_rgb(self.far_color))

    @property
    def mid_radius(self) -> float:
        lo, hi = self.radius_range
        return (lo + hi) / 2.0


@dataclass(frozen=True)
class VertexStyle:
    radius: float
    rgb: np.ndarray
    alpha: float


def linear_map(rank: int, rank_max: int, v_min: float, v_max: float) -> float:
    """Map an integer rank in 0..rank_max linearly onto [v_min, v_max].

    rank_max == 0 (single-vertex dataset) returns the range midpoint.
    """
    rank = operator.index(rank)
    rank_max = operator.index(rank_max)
    if rank < 0 or rank > rank_max:
        raise ValueError(f"rank {rank} outside 0..{rank_max}")
    if rank_max == 0:
        return (v_min + v_max) / 2.0
    t = rank / rank_max
    return v_min * (1.0 - t) + v_max * t


def _effective(rank, rank_max, orientation):
    return rank_max - rank if orientation == NEAR_MAX else rank


def style_vertex(rank: int, rank_max: int, spec: MappingSpec, base_color) -> VertexStyle:
    """Evaluate all enabled mappings for one vertex.

    Disabled variables take their neutral values: mid-range radius, the base
    color, unit luminance factor, alpha 1.
    """
    base = _as_rgb(base_color)
    eff = _effective(operator.index(rank), operator.index(rank_max), spec.orientation)

    if "size" in spec.enabled:
        radius = linear_map(eff, rank_max, *spec.radius_range)
    else:
        radius = spec.mid_radius

    if "color" in spec.enabled:
        rgb = np.array(
            [linear_map(eff, rank_max, spec.far_color[c], spec.near_color[c]) for c in range(3)]
        )
    else:
        rgb = base.copy()

    if "value" in spec.enabled:
        rgb = rgb * linear_map(eff, rank_max, *spec.value_range)

    alpha = linear_map(eff, rank_max, *spec.alpha_range) if "alpha" in spec.enabled else 1.0
    return VertexStyle(radius=radius, rgb=rgb, alpha=alpha)


def style_vertices(ranks: np.ndarray, rank_max: int, spec: MappingSpec, base_color):
    """Vectorized style_vertex over an integer rank array.

    Returns (rgb (n,3), alpha (n,)); radii come from radii_for_polylines since
    the engine applies them in a different pass.
    """
    ranks = np.asarray(ranks)
    if ranks.dtype.kind not in "iu":
        raise ValueError("ranks must be an integer array")
    t = _t_values(ranks, rank_max, spec.orientation)
    if "color" in spec.enabled:
        rgb = spec.far_color[None, :] * (1.0 - t[:, None]) + spec.near_color[None, :] * t[:, None]
    else:
        rgb = np.broadcast_to(_as_rgb(base_color), (ranks.shape[0], 3)).copy()
    if "value" in spec.enabled:
        vlo, vhi = spec.value_range
        rgb = rgb * (vlo * (1.0 - t) + vhi * t)[:, None]
    if "alpha" in spec.enabled:
        alo, ahi = spec.alpha_range
        alpha = alo * (1.0 - t) + ahi * t
    else:
        alpha = np.ones(ranks.shape[0])
    return rgb, alpha


def radii_for_polylines(ranks: np.ndarray, rank_max: int, spec: MappingSpec) -> np.ndarray:
    """Per-vertex tube radii from polyline-vertex ranks (size mapping pass)."""
    if "size" not in spec.enabled:
        raise ValueError("size mapping is not enabled; caller must skip the radius pass")
    ranks = np.asarray(ranks)
    if ranks.dtype.kind not in "iu":
        raise ValueError("ranks must be an integer array")
    t = _t_values(ranks, rank_max, spec.orientation)
    lo, hi = spec.radius_range
    return lo * (1.0 - t) + hi * t


def _t_values(ranks: np.ndarray, rank_max: int, orientation: str) -> np.ndarray:
    rank_max = operator.index(rank_max)
    if ranks.size and (ranks.min() < 0 or ranks.max() > rank_max):
        raise ValueError(f"rank outside 0..{rank_max}")
    if rank_max == 0:
        return np.full(ranks.shape[0], 0.5)
    eff = _effective(ranks.astype(np.int64), rank_max, orientation)
    return eff / rank_max
