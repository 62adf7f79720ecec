"""Binary control-message framing between master and workers.

Every message is [u32 little-endian length][u8 kind][payload], where length
counts the kind byte plus the payload.  Payload schemas are fixed-layout
little-endian structs followed, where applicable, by raw array bytes; numpy
structured/typed arrays serialize via tobytes() on explicitly little-endian
dtypes so the bytes are identical on every host we run on.

Depth-cell and hash-index messages carry a pass tag (1 = polyline vertices,
2 = tube-mesh vertices) so the two sorting rounds of a sized frame can never
be confused on the wire.
"""

from __future__ import annotations

import socket
import struct
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from ..camera import Camera
from ..ranksort import CELL_DTYPE, RANK_DTYPE
from ..raster import FrameTile
from ..stylemap import MappingSpec, NEAR_MAX, NEAR_MIN, VARIABLES

MAX_MESSAGE = 1 << 31  # sanity bound on declared frame length


class MessageKind(IntEnum):
    CAMERA_SYNC = 1
    MAPPING_UPDATE = 2
    RENDER_FRAME = 3
    TILE_UPLOAD = 4
    DEPTH_CELLS_UPLOAD = 5
    HASH_INDEX_BROADCAST = 6
    SHUTDOWN = 7


class ChannelClosed(ConnectionError):
    """Peer hung up mid-conversation."""


class Channel:
    """Length-prefixed message stream over a connected socket."""

    def __init__(self, sock: socket.socket):
        self._sock = sock

    def send(self, kind: MessageKind, payload: bytes = b"") -> None:
        body = bytes([kind]) + payload
        self._sock.sendall(struct.pack("<I", len(body)) + body)

    def recv(self) -> tuple[MessageKind, bytes]:
        header = self._recv_exact(4)
        (length,) = struct.unpack("<I", header)
        if length < 1 or length > MAX_MESSAGE:
            raise ValueError(f"invalid frame length {length}")
        body = self._recv_exact(length)
        try:
            kind = MessageKind(body[0])
        except ValueError:
            raise ValueError(f"unknown message kind {body[0]}") from None
        return kind, body[1:]

    def close(self) -> None:
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()

    def drop(self) -> None:
        # Close this process's fd copy without shutting the connection down;
        # after fork the peer's inherited copy keeps the stream alive.
        self._sock.close()

    def _recv_exact(self, n: int) -> bytes:
        chunks = []
        remaining = n
        while remaining:
            chunk = self._sock.recv(min(remaining, 1 << 20))
            if not chunk:
                raise ChannelClosed("channel closed by peer")
            chunks.append(chunk)
            remaining -= len(chunk)
        return b"".join(chunks)


def channel_pair() -> tuple[Channel, Channel]:
    """A connected (master, worker) channel pair for fork-style workers."""
    a, b = socket.socketpair()
    return Channel(a), Channel(b)


# --- CameraSync: 9 f64 (position, focal, up) + f64 fovY + u32 w + u32 h ---

_CAMERA_FMT = "<10dII"


def encode_camera(cam: Camera) -> bytes:
    return struct.pack(
        _CAMERA_FMT,
        *cam.position.tolist(), *cam.focal.tolist(), *cam.up.tolist(),
        cam.fov_y, cam.width, cam.height,
    )


def decode_camera(payload: bytes) -> Camera:
    vals = struct.unpack(_CAMERA_FMT, payload)
    return Camera(
        position=np.array(vals[0:3]),
        focal=np.array(vals[3:6]),
        up=np.array(vals[6:9]),
        fov_y=vals[9],
        viewport=(vals[10], vals[11]),
    )


# --- MappingUpdate: mapping spec plus the style environment that travels
#     with it (base color, background, tube sides) ---

_MAPPING_FMT = "<BB12d3d4BH"

_ORIENT_CODE = {NEAR_MAX: 0, NEAR_MIN: 1}
_ORIENT_NAME = {v: k for k, v in _ORIENT_CODE.items()}


@dataclass(frozen=True)
class StyleEnvironment:
    """Everything a worker needs to style and shade besides the ranks."""

    spec: MappingSpec
    base_color: tuple[float, float, float]
    background: tuple[int, int, int, int]  # RGBA8
    sides: int


def encode_mapping(env: StyleEnvironment) -> bytes:
    spec = env.spec
    mask = 0
    for bit, name in enumerate(VARIABLES):
        if name in spec.enabled:
            mask |= 1 << bit
    return struct.pack(
        _MAPPING_FMT,
        mask,
        _ORIENT_CODE[spec.orientation],
        spec.radius_range[0], spec.radius_range[1],
        *spec.near_color, *spec.far_color,
        spec.value_range[0], spec.value_range[1],
        spec.alpha_range[0], spec.alpha_range[1],
        *env.base_color,
        *env.background,
        env.sides,
    )


def decode_mapping(payload: bytes) -> StyleEnvironment:
    vals = struct.unpack(_MAPPING_FMT, payload)
    mask = vals[0]
    enabled = frozenset(name for bit, name in enumerate(VARIABLES) if mask & (1 << bit))
    spec = MappingSpec(
        enabled=enabled,
        radius_range=(vals[2], vals[3]),
        near_color=vals[4:7],
        far_color=vals[7:10],
        value_range=(vals[10], vals[11]),
        alpha_range=(vals[12], vals[13]),
        orientation=_ORIENT_NAME[vals[1]],
    )
    return StyleEnvironment(
        spec=spec,
        base_color=vals[14:17],
        background=vals[17:21],
        sides=vals[21],
    )


# --- RenderFrame: u32 frame id ---

def encode_render_frame(frame_id: int) -> bytes:
    return struct.pack("<I", frame_id)


def decode_render_frame(payload: bytes) -> int:
    return struct.unpack("<I", payload)[0]


# --- DepthCellsUpload: u16 worker + u8 pass + u32 count + cells ---

def encode_depth_cells(worker_id: int, pass_id: int, cells: np.ndarray) -> bytes:
    if cells.dtype != CELL_DTYPE:
        raise ValueError("cells must use the canonical depth-cell dtype")
    head = struct.pack("<HBI", worker_id, pass_id, cells.size)
    return head + np.ascontiguousarray(cells).tobytes()


def decode_depth_cells(payload: bytes) -> tuple[int, int, np.ndarray]:
    worker_id, pass_id, count = struct.unpack_from("<HBI", payload)
    body = payload[7:]
    cells = np.frombuffer(body, dtype=CELL_DTYPE)
    if cells.size != count:
        raise ValueError(f"depth-cell payload declares {count} cells, carries {cells.size}")
    # frombuffer views are read-only; hand the merge kernel an owned array
    return worker_id, pass_id, cells.copy()


# --- HashIndexBroadcast: u8 pass + u32 count + i32 ranks ---

def encode_hash_index(pass_id: int, ranks: np.ndarray) -> bytes:
    ranks = np.ascontiguousarray(ranks, dtype=RANK_DTYPE)
    return struct.pack("<BI", pass_id, ranks.size) + ranks.tobytes()


def decode_hash_index(payload: bytes) -> tuple[int, np.ndarray]:
    pass_id, count = struct.unpack_from("<BI", payload)
    ranks = np.frombuffer(payload[5:], dtype=RANK_DTYPE)
    if ranks.size != count:
        raise ValueError(f"hash-index payload declares {count} ranks, carries {ranks.size}")
    return pass_id, ranks


# --- TileUpload: u16 worker + u32 w + u32 h + u32 cumulative geometry builds
#     + rgba8 + f32 depth + u16 provenance ---

def encode_tile(worker_id: int, tile: FrameTile, geometry_builds: int) -> bytes:
    head = struct.pack("<HIII", worker_id, tile.width, tile.height, geometry_builds)
    return (head + tile.color.tobytes() +
            tile.depth.astype("<f4", copy=False).tobytes() +
            tile.provenance.astype("<u2", copy=False).tobytes() +
            tile.background.tobytes())


def decode_tile(payload: bytes) -> tuple[int, FrameTile, int]:
    worker_id, width, height, builds = struct.unpack_from("<HIII", payload)
    npx = width * height
    expected = 14 + npx * 4 + npx * 4 + npx * 2 + 4
    if len(payload) != expected:
        raise ValueError(f"tile payload is {len(payload)} bytes, expected {expected}")
    off = 14
    color = np.frombuffer(payload, dtype=np.uint8, count=npx * 4, offset=off)
    off += npx * 4
    depth = np.frombuffer(payload, dtype="<f4", count=npx, offset=off)
    off += npx * 4
    prov = np.frombuffer(payload, dtype="<u2", count=npx, offset=off)
    off += npx * 2
    background = np.frombuffer(payload, dtype=np.uint8, count=4, offset=off)
    tile = FrameTile(
        width=width,
        height=height,
        color=color.reshape(height, width, 4).copy(),
        depth=depth.reshape(height, width).copy(),
        provenance=prov.reshape(height, width).copy(),
        background=background.copy(),
    )
    return worker_id, tile, builds
