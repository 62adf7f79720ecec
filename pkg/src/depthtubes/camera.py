"""Camera model: eye-space depth, trackball rotation, perspective projection.

Depth is the signed eye-space distance along the view direction (not
window-space z), so it is independent of any near/far plane choice.  Screen
coordinates put the origin at the top-left pixel corner with +x right and
+y down, which matches raster buffer layout byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_FOV_Y = 30.0
BEHIND_EPS = 1e-6
ELEVATION_GUARD = 1e-4  # min angle (rad) kept between view direction and up


def rotate_about_axis(v: np.ndarray, axis: np.ndarray, radians: float) -> np.ndarray:
    """Rodrigues rotation of vector(s) v about a unit axis."""
    axis = np.asarray(axis, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    c = math.cos(radians)
    s = math.sin(radians)
    return v * c + np.cross(axis, v) * s + axis * np.dot(v, axis) * (1.0 - c)


@dataclass(frozen=True)
class Camera:
    position: np.ndarray
    focal: np.ndarray
    up: np.ndarray
    fov_y: float = DEFAULT_FOV_Y
    viewport: tuple[int, int] = (1024, 768)

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=np.float64).reshape(3)
        foc = np.asarray(self.focal, dtype=np.float64).reshape(3)
        up = np.asarray(self.up, dtype=np.float64).reshape(3)
        view = foc - pos
        if np.linalg.norm(view) <= 0.0:
            raise ValueError("camera position and focal point coincide")
        un = np.linalg.norm(up)
        if un <= 0.0:
            raise ValueError("up vector is zero")
        up = up / un
        if np.linalg.norm(np.cross(up, view / np.linalg.norm(view))) < 1e-9:
            raise ValueError("up vector is parallel to the view direction")
        if not 0.0 < self.fov_y < 180.0:
            raise ValueError("fov_y must be in (0, 180) degrees")
        w, h = self.viewport
        if w < 1 or h < 1:
            raise ValueError("viewport must be at least 1x1")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "focal", foc)
        object.__setattr__(self, "up", up)
        object.__setattr__(self, "viewport", (int(w), int(h)))

    @property
    def width(self) -> int:
        return self.viewport[0]

    @property
    def height(self) -> int:
        return self.viewport[1]


def view_direction(cam: Camera) -> np.ndarray:
    v = cam.focal - cam.position
    return v / np.linalg.norm(v)


def camera_basis(cam: Camera) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthonormal (right, up, view) with up re-orthogonalized against view."""
    view = view_direction(cam)
    up = cam.up - np.dot(cam.up, view) * view
    up /= np.linalg.norm(up)
    right = np.cross(view, up)
    return right, up, view


def vertex_depth(cam: Camera, v) -> float:
    d = np.asarray(v, dtype=np.float64) - cam.position
    return float(np.dot(d, view_direction(cam)))


def vertex_depths(cam: Camera, points: np.ndarray) -> np.ndarray:
    """Eye-space depth for an (n, 3) array of points.

    Written as explicit per-component arithmetic so a slice of a larger array
    produces bit-identical depths to the full array (no BLAS reassociation).
    """
    w = view_direction(cam)
    d = points - cam.position
    return d[:, 0] * w[0] + d[:, 1] * w[1] + d[:, 2] * w[2]


def focal_length_px(cam: Camera) -> float:
    return cam.height / (2.0 * math.tan(math.radians(cam.fov_y) / 2.0))


def project_to_screen(cam: Camera, v):
    """Pinhole projection of one point to pixel coordinates.

    Returns (x, y, depth) or None when the point is at or behind the camera
    plane (depth <= 1e-6).
    """
    right, up, view = camera_basis(cam)
    d = np.asarray(v, dtype=np.float64) - cam.position
    depth = float(d[0] * view[0] + d[1] * view[1] + d[2] * view[2])
    if depth <= BEHIND_EPS:
        return None
    f = focal_length_px(cam)
    x = cam.width / 2.0 + f * float(np.dot(d, right)) / depth
    y = cam.height / 2.0 - f * float(np.dot(d, up)) / depth
    return x, y, depth


def project_points(cam: Camera, points: np.ndarray):
    """Vectorized projection: (xs, ys, depths, behind_mask) for (n, 3) points.

    xs/ys are meaningless where behind_mask is set; callers must honor it.
    """
    right, up, view = camera_basis(cam)
    d = points - cam.position
    depths = d[:, 0] * view[0] + d[:, 1] * view[1] + d[:, 2] * view[2]
    behind = depths <= BEHIND_EPS
    safe = np.where(behind, 1.0, depths)
    f = focal_length_px(cam)
    xe = d[:, 0] * right[0] + d[:, 1] * right[1] + d[:, 2] * right[2]
    ye = d[:, 0] * up[0] + d[:, 1] * up[1] + d[:, 2] * up[2]
    xs = cam.width / 2.0 + f * xe / safe
    ys = cam.height / 2.0 - f * ye / safe
    return xs, ys, depths, behind


def trackball_rotate(cam: Camera, dx_ndc: float, dy_ndc: float) -> Camera:
    """Rotate the camera about its focal point.

    dx maps to azimuth about the up vector, dy to elevation about the camera's
    right axis, each scaled by 180 degrees per unit of normalized input.
    Azimuth is applied first.  Elevation is clamped so the view direction
    never comes within 1e-4 rad of the up axis, and the distance to the focal
    point is preserved.
    """
    if abs(dx_ndc) > 1.0 or abs(dy_ndc) > 1.0:
        raise ValueError("normalized trackball deltas must lie in [-1, 1]")
    if dx_ndc == 0.0 and dy_ndc == 0.0:
        return cam

    offset = cam.position - cam.focal
    dist = np.linalg.norm(offset)
    _, up, _ = camera_basis(cam)

    azimuth = math.radians(dx_ndc * 180.0)
    if azimuth != 0.0:
        offset = rotate_about_axis(offset, up, azimuth)

    elevation = math.radians(dy_ndc * 180.0)
    if elevation != 0.0:
        view = -offset / np.linalg.norm(offset)
        right = np.cross(view, up)
        right /= np.linalg.norm(right)
        # Rotating the view by +theta about `right` tilts it toward up, so the
        # view/up angle shrinks by theta; keep it inside the guard band.
        phi = math.acos(max(-1.0, min(1.0, float(np.dot(view, up)))))
        elevation = max(phi - math.pi + ELEVATION_GUARD, min(phi - ELEVATION_GUARD, elevation))
        offset = rotate_about_axis(offset, right, elevation)

    offset *= dist / np.linalg.norm(offset)
    position = cam.focal + offset
    view = -offset / dist
    up = up - np.dot(up, view) * view
    up /= np.linalg.norm(up)
    return Camera(position, cam.focal, up, cam.fov_y, cam.viewport)


def frame_bounds(bounds: np.ndarray, fov_y: float = DEFAULT_FOV_Y,
                 viewport: tuple[int, int] = (1024, 768),
                 direction=(0.0, 0.0, 1.0)) -> Camera:
    """Place a camera so an axis-aligned bounding box fills most of the view."""
    lo, hi = np.asarray(bounds, dtype=np.float64)
    center = (lo + hi) / 2.0
    radius = float(np.linalg.norm(hi - lo)) / 2.0
    radius = max(radius, 1e-6)
    direction = np.asarray(direction, dtype=np.float64)
    direction = direction / np.linalg.norm(direction)
    aspect = viewport[0] / viewport[1]
    half = math.radians(fov_y) / 2.0
    half_x = math.atan(math.tan(half) * aspect)
    dist = radius / math.tan(min(half, half_x)) * 1.15
    position = center + direction * dist
    up = np.array([0.0, 1.0, 0.0])
    if abs(np.dot(up, direction)) > 0.99:
        up = np.array([0.0, 0.0, 1.0])
    return Camera(position, center, up, fov_y, viewport)
