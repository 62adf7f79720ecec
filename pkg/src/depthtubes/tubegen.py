"""Tube meshes from polylines via parallel-transport sweep frames.

Frames use parallel transport rather than Frenet frames: Frenet is undefined
on straight segments and flips at inflection points, while transported frames
are stable and fully determined by the curve, which keeps repeated mesh builds
byte-identical.

Each polyline vertex gets a ring of `sides` mesh vertices; consecutive rings
are stitched with two triangles per quad.  No end caps.  Every mesh vertex
records the global id of the polyline vertex that spawned it, so ranks (and
radii) computed on line geometry propagate to the tube surface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Polyline


@dataclass(frozen=True)
class TubeMesh:
    positions: np.ndarray      # (m, 3) float64
    normals: np.ndarray        # (m, 3) float64, unit outward
    source_vertex: np.ndarray  # (m,) int64, global id of originating polyline vertex
    triangles: np.ndarray      # (t, 3) int32, indices into positions
    polyline_id: int

    def __post_init__(self):
        m = self.positions.shape[0]
        if self.normals.shape[0] != m or self.source_vertex.shape[0] != m:
            raise ValueError("positions, normals, source_vertex must have equal length")
        if self.triangles.size and (self.triangles.min() < 0 or self.triangles.max() >= m):
            raise ValueError("triangle index out of range")

    @property
    def vertex_count(self) -> int:
        return self.positions.shape[0]

    @property
    def triangle_count(self) -> int:
        return self.triangles.shape[0]


def sweep_frames(polyline: Polyline):
    """Per-vertex orthonormal frames (tangents, normals, binormals).

    Tangents come from central differences (one-sided at the ends).  The first
    normal projects the world axis least aligned with the tangent; subsequent
    normals are carried forward by the minimal rotation between consecutive
    tangents.
    """
    verts = polyline.vertices
    n = verts.shape[0]
    tangents = np.empty((n, 3))
    tangents[0] = verts[1] - verts[0]
    tangents[-1] = verts[-1] - verts[-2]
    if n > 2:
        tangents[1:-1] = verts[2:] - verts[:-2]
    tangents /= np.linalg.norm(tangents, axis=1)[:, None]

    normals = np.empty((n, 3))
    pick = np.zeros(3)
    pick[int(np.argmin(np.abs(tangents[0])))] = 1.0
    first = pick - np.dot(pick, tangents[0]) * tangents[0]
    normals[0] = first / np.linalg.norm(first)

    for i in range(1, n):
        prev_t = tangents[i - 1]
        cur_t = tangents[i]
        axis = np.cross(prev_t, cur_t)
        s = np.linalg.norm(axis)
        c = float(np.dot(prev_t, cur_t))
        if s < 1e-12:
            carried = normals[i - 1]
        else:
            axis = axis / s
            v = normals[i - 1]
            carried = v * c + np.cross(axis, v) * s + axis * np.dot(v, axis) * (1.0 - c)
        # Re-orthogonalize against drift so |n|=1 and n.t=0 hold over long curves.
        carried = carried - np.dot(carried, cur_t) * cur_t
        normals[i] = carried / np.linalg.norm(carried)

    binormals = np.cross(tangents, normals)
    return tangents, normals, binormals


def tessellate_tube(polyline: Polyline, radii: np.ndarray, sides: int,
                    vertex_id_offset: int = 0) -> TubeMesh:
    """Wrap a polyline into a closed triangle tube with per-vertex radii.

    vertex_id_offset is the global id of the polyline's first vertex; ring
    vertices inherit source ids from it.  Counts are sides*n vertices and
    2*sides*(n-1) triangles for an n-vertex polyline.
    """
    if sides < 3:
        raise ValueError("tube cross-section needs at least 3 sides")
    radii = np.asarray(radii, dtype=np.float64)
    n = len(polyline)
    if radii.shape != (n,):
        raise ValueError(f"expected {n} radii, got shape {radii.shape}")
    if np.any(radii <= 0.0):
        raise ValueError("tube radii must be positive")

    _, normals, binormals = sweep_frames(polyline)
    theta = 2.0 * np.pi * np.arange(sides) / sides
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)

    # ring_dirs[i, k] is the unit outward direction of ring i, spoke k
    ring_dirs = cos_t[None, :, None] * normals[:, None, :] + sin_t[None, :, None] * binormals[:, None, :]
    positions = polyline.vertices[:, None, :] + radii[:, None, None] * ring_dirs
    positions = positions.reshape(-1, 3)
    out_normals = ring_dirs.reshape(-1, 3)
    source = np.repeat(np.arange(vertex_id_offset, vertex_id_offset + n, dtype=np.int64), sides)

    tris = np.empty((2 * sides * (n - 1), 3), dtype=np.int32)
    k = np.arange(sides)
    k1 = (k + 1) % sides
    for i in range(n - 1):
        a = i * sides + k
        b = i * sides + k1
        c = (i + 1) * sides + k
        d = (i + 1) * sides + k1
        block = tris[2 * sides * i : 2 * sides * (i + 1)]
        block[0::2, 0] = a
        block[0::2, 1] = c
        block[0::2, 2] = b
        block[1::2, 0] = b
        block[1::2, 1] = c
        block[1::2, 2] = d
    return TubeMesh(positions, out_normals, source, tris, polyline.id)


def concat_meshes(meshes: list[TubeMesh]) -> TubeMesh:
    """Concatenate tube meshes into one batch (polyline_id is -1 on batches).

    Vertex order is preserved mesh by mesh; triangle indices are shifted by
    the running vertex offset.  An empty list yields an empty batch.
    """
    if not meshes:
        return TubeMesh(
            positions=np.zeros((0, 3)),
            normals=np.zeros((0, 3)),
            source_vertex=np.zeros(0, dtype=np.int64),
            triangles=np.zeros((0, 3), dtype=np.int32),
            polyline_id=-1,
        )
    if len(meshes) == 1:
        m = meshes[0]
        return TubeMesh(m.positions, m.normals, m.source_vertex, m.triangles, -1)
    offsets = np.cumsum([0] + [m.vertex_count for m in meshes[:-1]])
    tris = [m.triangles + np.int32(off) for m, off in zip(meshes, offsets)]
    return TubeMesh(
        positions=np.concatenate([m.positions for m in meshes]),
        normals=np.concatenate([m.normals for m in meshes]),
        source_vertex=np.concatenate([m.source_vertex for m in meshes]),
        triangles=np.concatenate(tris),
        polyline_id=-1,
    )
