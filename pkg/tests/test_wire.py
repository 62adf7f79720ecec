from __future__ import annotations

import struct
import threading

import numpy as np
import pytest

from depthtubes.camera import Camera
from depthtubes.raster import new_tile
from depthtubes.ranksort import CELL_DTYPE
from depthtubes.runtime.wire import (Channel, ChannelClosed, MessageKind,
                                     StyleEnvironment, channel_pair,
                                     decode_camera, decode_depth_cells,
                                     decode_hash_index, decode_mapping,
                                     decode_render_frame, decode_tile,
                                     encode_camera, encode_depth_cells,
                                     encode_hash_index, encode_mapping,
                                     encode_render_frame, encode_tile)


def sample_env(**kw):
    defaults = dict(
        spec=None, base_color=(0.7, 0.6, 0.5), background=(1, 2, 3, 255), sides=6,
    )
    defaults.update(kw)
    if defaults["spec"] is None:
        from depthtubes.stylemap import MappingSpec
        defaults["spec"] = MappingSpec(enabled=frozenset({"size", "alpha"}),
                                       radius_range=(0.01, 0.25),
                                       near_color=(0.9, 0.1, 0.2),
                                       far_color=(0.2, 0.3, 0.8),
                                       value_range=(0.3, 0.9),
                                       alpha_range=(0.2, 0.7),
                                       orientation="near-min")
    return StyleEnvironment(**defaults)


class TestPayloadRoundTrips:
    def test_camera(self):
        cam = Camera(position=(1.5, -2.0, 3.25), focal=(0.0, 0.5, -1.0),
                     up=(0.0, 1.0, 0.0), fov_y=42.5, viewport=(640, 480))
        out = decode_camera(encode_camera(cam))
        np.testing.assert_array_equal(out.position, cam.position)
        np.testing.assert_array_equal(out.focal, cam.focal)
        np.testing.assert_array_equal(out.up, cam.up)
        assert out.fov_y == cam.fov_y
        assert out.viewport == cam.viewport

    def test_mapping_environment(self):
        env = sample_env()
        out = decode_mapping(encode_mapping(env))
        assert out.spec.enabled == env.spec.enabled
        assert out.spec.radius_range == env.spec.radius_range
        np.testing.assert_array_equal(out.spec.near_color, env.spec.near_color)
        np.testing.assert_array_equal(out.spec.far_color, env.spec.far_color)
        assert out.spec.value_range == env.spec.value_range
        assert out.spec.alpha_range == env.spec.alpha_range
        assert out.spec.orientation == env.spec.orientation
        assert out.base_color == env.base_color
        assert out.background == env.background
        assert out.sides == env.sides

    def test_mapping_all_enable_combinations(self):
        from depthtubes.stylemap import VARIABLES, MappingSpec
        for bits in range(16):
            enabled = frozenset(v for i, v in enumerate(VARIABLES) if bits & (1 << i))
            env = sample_env(spec=MappingSpec(enabled=enabled))
            assert decode_mapping(encode_mapping(env)).spec.enabled == enabled

    def test_render_frame(self):
        assert decode_render_frame(encode_render_frame(123456)) == 123456

    def test_depth_cells(self):
        cells = np.zeros(3, dtype=CELL_DTYPE)
        cells["id"] = [5, 1, 9]
        cells["vd"] = [0.25, -1.5, 3.75]
        wid, pid, out = decode_depth_cells(encode_depth_cells(2, 1, cells))
        assert (wid, pid) == (2, 1)
        np.testing.assert_array_equal(out, cells)
        assert out.flags.writeable  # consumers hand this to compiled kernels

    def test_depth_cells_empty(self):
        cells = np.zeros(0, dtype=CELL_DTYPE)
        _, _, out = decode_depth_cells(encode_depth_cells(0, 2, cells))
        assert out.shape == (0,)

    def test_hash_index(self):
        ranks = np.array([3, 0, 2, 1], dtype=np.int32)
        pid, out = decode_hash_index(encode_hash_index(2, ranks))
        assert pid == 2
        np.testing.assert_array_equal(out, ranks)

    def test_tile(self):
        rng = np.random.default_rng(0)
        tile = new_tile(7, 5, background=(9, 8, 7, 255))
        tile.color[:] = rng.integers(0, 256, size=tile.color.shape, dtype=np.uint8)
        tile.depth[:] = rng.random(tile.depth.shape, dtype=np.float32)
        tile.provenance[:] = rng.integers(0, 4, size=tile.provenance.shape, dtype=np.uint16)
        wid, out, builds = decode_tile(encode_tile(3, tile, geometry_builds=17))
        assert (wid, builds) == (3, 17)
        assert (out.width, out.height) == (7, 5)
        np.testing.assert_array_equal(out.color, tile.color)
        np.testing.assert_array_equal(out.depth, tile.depth)
        np.testing.assert_array_equal(out.provenance, tile.provenance)
        np.testing.assert_array_equal(out.background, tile.background)

    def test_tile_size_mismatch_rejected(self):
        tile = new_tile(4, 4)
        payload = encode_tile(0, tile, 0)
        with pytest.raises(ValueError):
            decode_tile(payload[:-3])

    def test_depth_cells_wrong_count_rejected(self):
        cells = np.zeros(2, dtype=CELL_DTYPE)
        payload = encode_depth_cells(0, 1, cells)
        with pytest.raises(ValueError):
            decode_depth_cells(payload + b"\x00" * 4)


class TestChannel:
    def test_send_recv_all_kinds(self):
        a, b = channel_pair()
        try:
            payloads = [
                (MessageKind.CAMERA_SYNC, encode_camera(Camera((0, 0, 5), (0, 0, 0), (0, 1, 0)))),
                (MessageKind.MAPPING_UPDATE, encode_mapping(sample_env())),
                (MessageKind.RENDER_FRAME, encode_render_frame(7)),
                (MessageKind.DEPTH_CELLS_UPLOAD,
                 encode_depth_cells(1, 1, np.zeros(2, dtype=CELL_DTYPE))),
                (MessageKind.HASH_INDEX_BROADCAST,
                 encode_hash_index(1, np.arange(4, dtype=np.int32))),
                (MessageKind.TILE_UPLOAD, encode_tile(0, new_tile(2, 2), 0)),
                (MessageKind.SHUTDOWN, b""),
            ]
            for kind, payload in payloads:
                a.send(kind, payload)
            for kind, payload in payloads:
                got_kind, got_payload = b.recv()
                assert got_kind == kind
                assert got_payload == payload
        finally:
            a.close()
            b.close()

    def test_large_message(self):
        a, b = channel_pair()
        try:
            blob = bytes(np.random.default_rng(1).integers(0, 256, 2_000_000, dtype=np.uint8))
            t = threading.Thread(target=a.send, args=(MessageKind.TILE_UPLOAD, blob))
            t.start()
            kind, payload = b.recv()
            t.join()
            assert kind == MessageKind.TILE_UPLOAD
            assert payload == blob
        finally:
            a.close()
            b.close()

    def test_eof_raises_channel_closed(self):
        a, b = channel_pair()
        a.close()
        with pytest.raises(ChannelClosed):
            b.recv()
        b.close()

    def test_unknown_kind_rejected(self):
        a, b = channel_pair()
        try:
            a._sock.sendall(struct.pack("<I", 1) + bytes([99]))
            with pytest.raises(ValueError, match="unknown message kind"):
                b.recv()
        finally:
            a.close()
            b.close()

    def test_zero_length_frame_rejected(self):
        a, b = channel_pair()
        try:
            a._sock.sendall(struct.pack("<I", 0))
            with pytest.raises(ValueError, match="invalid frame length"):
                b.recv()
        finally:
            a.close()
            b.close()

    def test_oversize_declared_length_rejected(self):
        a, b = channel_pair()
        try:
            a._sock.sendall(struct.pack("<I", (1 << 31) + 1) + bytes([1]))
            with pytest.raises(ValueError, match="invalid frame length"):
                b.recv()
        finally:
            a.close()
            b.close()

    def test_truncated_frame_raises_channel_closed(self):
        a, b = channel_pair()
        a._sock.sendall(struct.pack("<I", 100) + bytes([3]) + b"only-a-bit")
        a.close()
        with pytest.raises(ChannelClosed):
            b.recv()
        b.close()
