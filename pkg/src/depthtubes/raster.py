"""Deterministic off-screen software rasterizer.

Each worker rasterizes its own partition into a private FrameTile: an RGBA8
color buffer, a float32 eye-space depth buffer, and a uint16 provenance buffer
recording which worker wrote each pixel.  Provenance gives depth ties a total
order at compositing time, so tiles can be merged in any arrival order.

Rules that make output byte-reproducible:
  - pixel-center coverage with the top-left fill rule (shared edges are
    covered exactly once);
  - strict-less depth test, triangles processed in ascending index, so
    equal-depth fragments within a worker resolve first-written-wins;
  - triangles with any vertex at or behind the camera plane are discarded
    whole (no near-plane clipping);
  - transparency is folded into shading against the background color, never
    blended between fragments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .camera import Camera, project_points, view_direction
from .tubegen import TubeMesh

DEPTH_SENTINEL = np.float32(np.inf)
NO_WORKER = 0xFFFF

AMBIENT = 0.2
DIFFUSE = 0.8


@dataclass
class FrameTile:
    """One worker's off-screen rendition."""

    width: int
    height: int
    color: np.ndarray       # (h, w, 4) uint8
    depth: np.ndarray       # (h, w) float32, +inf where unwritten
    provenance: np.ndarray  # (h, w) uint16, NO_WORKER where unwritten
    background: np.ndarray  # (4,) uint8, the clear color shading blends against

    def copy(self) -> "FrameTile":
        return FrameTile(self.width, self.height, self.color.copy(),
                         self.depth.copy(), self.provenance.copy(),
                         self.background.copy())


def new_tile(width: int, height: int, background=(0, 0, 0, 255)) -> FrameTile:
    tile = FrameTile(
        width=width,
        height=height,
        color=np.empty((height, width, 4), dtype=np.uint8),
        depth=np.empty((height, width), dtype=np.float32),
        provenance=np.empty((height, width), dtype=np.uint16),
        background=np.zeros(4, dtype=np.uint8),
    )
    return clear(tile, background)


def clear(tile: FrameTile, background=(0, 0, 0, 255)) -> FrameTile:
    """Reset every pixel to the background color and sentinel depth/provenance."""
    raw = np.asarray(background, dtype=np.int64)
    if raw.shape != (4,) or raw.min() < 0 or raw.max() > 255:
        raise ValueError("background must be an RGBA8 quadruple with channels in 0..255")
    bg = raw.astype(np.uint8)
    tile.background = bg
    tile.color[:] = bg
    tile.depth[:] = DEPTH_SENTINEL
    tile.provenance[:] = NO_WORKER
    return tile


def shade(base_rgb, alpha: float, normal, view_dir, background):
    """Headlight Lambert shading with transparency folded against the background.

    base_rgb and background are linear RGB in [0, 1].  Reference scalar
    implementation; the raster kernel inlines the identical arithmetic.
    Returns an RGBA8 tuple (alpha byte is always 255: coverage is opaque,
    translucency already lives in the RGB).
    """
    normal = np.asarray(normal, dtype=np.float64)
    view_dir = np.asarray(view_dir, dtype=np.float64)
    for name, vec in (("normal", normal), ("view_dir", view_dir)):
        if abs(np.linalg.norm(vec) - 1.0) > 1e-3:
            raise ValueError(f"{name} must be unit length")
    ndv = float(normal[0] * view_dir[0] + normal[1] * view_dir[1] + normal[2] * view_dir[2])
    lambert = AMBIENT + DIFFUSE * max(0.0, -ndv)
    out = []
    for c in range(3):
        lit = float(base_rgb[c]) * lambert
        val = alpha * lit + (1.0 - alpha) * float(background[c])
        out.append(_quantize(val))
    return out[0], out[1], out[2], 255


def _quantize(v: float) -> int:
    q = int(math.floor(v * 255.0 + 0.5))
    return 0 if q < 0 else (255 if q > 255 else q)


@njit(cache=True)
def _raster_kernel(xs, ys, zs, behind, tris, rgb, alpha, normals,
                   view_dir, bg, color, depth, prov, worker_id):  # pragma: no cover
    height, width = depth.shape
    vx = view_dir[0]
    vy = view_dir[1]
    vz = view_dir[2]
    for t in range(tris.shape[0]):
        i0 = tris[t, 0]
        i1 = tris[t, 1]
        i2 = tris[t, 2]
        if behind[i0] or behind[i1] or behind[i2]:
            continue
        x0 = xs[i0]; y0 = ys[i0]
        x1 = xs[i1]; y1 = ys[i1]
        x2 = xs[i2]; y2 = ys[i2]
        area2 = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
        if area2 == 0.0:
            continue
        if area2 < 0.0:
            # canonical winding: swap the last two vertices
            i1, i2 = i2, i1
            x1, y1, x2, y2 = x2, y2, x1, y1
            area2 = -area2

        min_x = min(x0, min(x1, x2))
        max_x = max(x0, max(x1, x2))
        min_y = min(y0, min(y1, y2))
        max_y = max(y0, max(y1, y2))
        px_lo = int(math.ceil(min_x - 0.5))
        px_hi = int(math.floor(max_x - 0.5))
        py_lo = int(math.ceil(min_y - 0.5))
        py_hi = int(math.floor(max_y - 0.5))
        if px_lo < 0:
            px_lo = 0
        if py_lo < 0:
            py_lo = 0
        if px_hi > width - 1:
            px_hi = width - 1
        if py_hi > height - 1:
            py_hi = height - 1
        if px_lo > px_hi or py_lo > py_hi:
            continue

        # top-left acceptance for zero edge functions, y-down screen space
        e0x = x2 - x1; e0y = y2 - y1
        e1x = x0 - x2; e1y = y0 - y2
        e2x = x1 - x0; e2y = y1 - y0
        tl0 = e0y < 0.0 or (e0y == 0.0 and e0x > 0.0)
        tl1 = e1y < 0.0 or (e1y == 0.0 and e1x > 0.0)
        tl2 = e2y < 0.0 or (e2y == 0.0 and e2x > 0.0)

        z0 = zs[i0]; z1 = zs[i1]; z2 = zs[i2]
        for py in range(py_lo, py_hi + 1):
            cy = py + 0.5
            for px in range(px_lo, px_hi + 1):
                cx = px + 0.5
                w0 = e0x * (cy - y1) - e0y * (cx - x1)
                w1 = e1x * (cy - y2) - e1y * (cx - x2)
                w2 = e2x * (cy - y0) - e2y * (cx - x0)
                if w0 < 0.0 or w1 < 0.0 or w2 < 0.0:
                    continue
                if w0 == 0.0 and not tl0:
                    continue
                if w1 == 0.0 and not tl1:
                    continue
                if w2 == 0.0 and not tl2:
                    continue
                b0 = w0 / area2
                b1 = w1 / area2
                b2 = w2 / area2
                q0 = b0 / z0
                q1 = b1 / z1
                q2 = b2 / z2
                z = 1.0 / (q0 + q1 + q2)
                zf = np.float32(z)
                if not zf < depth[py, px]:
                    continue
                # perspective-correct attribute interpolation
                nx = (q0 * normals[i0, 0] + q1 * normals[i1, 0] + q2 * normals[i2, 0]) * z
                ny = (q0 * normals[i0, 1] + q1 * normals[i1, 1] + q2 * normals[i2, 1]) * z
                nz = (q0 * normals[i0, 2] + q1 * normals[i1, 2] + q2 * normals[i2, 2]) * z
                nlen = math.sqrt(nx * nx + ny * ny + nz * nz)
                if nlen > 0.0:
                    nx /= nlen
                    ny /= nlen
                    nz /= nlen
                else:
                    nx = -vx
                    ny = -vy
                    nz = -vz
                a = (q0 * alpha[i0] + q1 * alpha[i1] + q2 * alpha[i2]) * z
                ndv = nx * vx + ny * vy + nz * vz
                lambert = AMBIENT + DIFFUSE * max(0.0, -ndv)
                for c in range(3):
                    base = (q0 * rgb[i0, c] + q1 * rgb[i1, c] + q2 * rgb[i2, c]) * z
                    lit = base * lambert
                    val = a * lit + (1.0 - a) * bg[c]
                    q = int(math.floor(val * 255.0 + 0.5))
                    if q < 0:
                        q = 0
                    elif q > 255:
                        q = 255
                    color[py, px, c] = q
                color[py, px, 3] = 255
                depth[py, px] = zf
                prov[py, px] = worker_id


def rasterize_mesh(tile: FrameTile, mesh: TubeMesh, styles: np.ndarray,
                   cam: Camera, worker_id: int) -> FrameTile:
    """Rasterize a tube mesh into the tile with per-vertex styles.

    styles is an (n, 4) float array with columns r, g, b, alpha in [0, 1].
    The tile is modified in place and returned.
    """
    if (tile.width, tile.height) != (cam.width, cam.height):
        raise ValueError("tile dimensions do not match the camera viewport")
    styles = np.asarray(styles, dtype=np.float64)
    if styles.shape != (mesh.vertex_count, 4):
        raise ValueError(f"expected ({mesh.vertex_count}, 4) style array, got {styles.shape}")
    if mesh.triangle_count == 0:
        return tile
    xs, ys, zs, behind = project_points(cam, mesh.positions)
    bg = tile.background[:3].astype(np.float64) / 255.0
    _raster_kernel(
        xs, ys, zs, behind, np.ascontiguousarray(mesh.triangles),
        np.ascontiguousarray(styles[:, :3]), np.ascontiguousarray(styles[:, 3]),
        np.ascontiguousarray(mesh.normals), view_direction(cam), bg,
        tile.color, tile.depth, tile.provenance, np.uint16(worker_id),
    )
    return tile
