"""Image export: binary PPM for color, a small raw format for depth."""

from __future__ import annotations

import struct

import numpy as np

from ..raster import FrameTile

DEPTH_MAGIC = b"DPTH"


def write_ppm(tile: FrameTile, path) -> None:
    """Write the tile's color as binary PPM (P6, maxval 255, alpha dropped)."""
    header = f"P6\n{tile.width} {tile.height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(tile.color[:, :, :3]).tobytes())


def write_depth(tile: FrameTile, path) -> None:
    """Write the float32 depth plane: 16-byte header then row-major LE floats.

    Header: magic "DPTH", u32 width, u32 height, 4 reserved zero bytes.
    Unwritten pixels carry +inf.
    """
    with open(path, "wb") as fh:
        fh.write(DEPTH_MAGIC)
        fh.write(struct.pack("<II4x", tile.width, tile.height))
        fh.write(tile.depth.astype("<f4", copy=False).tobytes())


def read_ppm(path) -> np.ndarray:
    """Read a binary PPM written by write_ppm back into an (h, w, 3) array."""
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P6"):
        raise ValueError("not a binary PPM file")
    fields: list[bytes] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    pos += 1  # single whitespace byte after maxval
    width, height, maxval = (int(f) for f in fields)
    if maxval != 255:
        raise ValueError(f"unsupported maxval {maxval}")
    pixels = np.frombuffer(data, dtype=np.uint8, count=width * height * 3, offset=pos)
    return pixels.reshape(height, width, 3).copy()


def read_depth(path) -> np.ndarray:
    """Read a depth dump written by write_depth back into an (h, w) float32 array."""
    with open(path, "rb") as fh:
        head = fh.read(16)
        if head[:4] != DEPTH_MAGIC:
            raise ValueError("not a depth dump")
        width, height = struct.unpack("<II4x", head[4:])
        depth = np.frombuffer(fh.read(width * height * 4), dtype="<f4")
    return depth.reshape(height, width).copy()
