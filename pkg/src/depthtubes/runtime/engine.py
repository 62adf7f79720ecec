"""Master/worker parallel rendering engine.

The master process doubles as worker 0: it renders its own partition inline
while forked child processes (partitions 1..P-1) run the same per-partition
code behind socket channels.  Each frame runs one or two global sorting
rounds — polyline vertices only when the size mapping needs rank-driven
radii, then always the tube-mesh vertices — with the master merging sorted
runs as they arrive and broadcasting the dense rank table back.  Tiles are
composited eagerly on arrival; (depth, provenance) ordering makes the result
independent of arrival order, so the final image is byte-identical for any
worker count.
"""

from __future__ import annotations

import dataclasses
import logging
import multiprocessing
import queue
import threading
import time

import numpy as np

from ..camera import Camera, trackball_rotate, vertex_depths
from ..compositor import composite_into
from ..geometry import Dataset, Polyline
from ..ranksort import (build_hash_index, depth_cells, local_depth_sort,
                        lookup_global_ranks, twoway_merge)
from ..raster import FrameTile, clear, new_tile, rasterize_mesh
from ..stylemap import MappingSpec, radii_for_polylines, style_vertices
from ..tubegen import concat_meshes, tessellate_tube
from .partition import Partition, partition_ranges
from .wire import (Channel, ChannelClosed, MessageKind, StyleEnvironment,
                   channel_pair, decode_camera, decode_depth_cells,
                   decode_hash_index, decode_mapping, decode_render_frame,
                   decode_tile, encode_camera, encode_depth_cells,
                   encode_hash_index, encode_mapping, encode_render_frame,
                   encode_tile)

logger = logging.getLogger(__name__)

PASS_LINES = 1
PASS_MESH = 2

DEFAULT_BASE_COLOR = (0.78, 0.78, 0.78)
DEFAULT_BACKGROUND = (16, 16, 20, 255)


class EngineError(RuntimeError):
    """A worker died or broke protocol; the frame cannot be completed."""


@dataclasses.dataclass(frozen=True)
class EngineConfig:
    workers: int = 1
    sides: int = 6
    base_color: tuple[float, float, float] = DEFAULT_BASE_COLOR
    background: tuple[int, int, int, int] = DEFAULT_BACKGROUND

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.sides < 3:
            raise ValueError(f"sides must be >= 3, got {self.sides}")


@dataclasses.dataclass(frozen=True)
class FrameStats:
    frame_id: int
    width: int
    height: int
    workers: int
    frame_ms: float
    sort_ms: float
    sort_rounds: int       # sorting rounds this frame (1, or 2 with size mapping)
    geometry_builds: int   # cumulative tube tessellations across all workers


class PartitionRenderer:
    """Per-partition pipeline: depths -> cells, ranks -> geometry -> tile.

    Used by the master for its own partition and by each forked worker; it
    holds only partition-local state plus the last camera/style broadcast.
    """

    def __init__(self, partition: Partition, polylines: list[Polyline]):
        if len(polylines) != partition.line_count:
            raise ValueError("polyline slice does not match partition range")
        self.partition = partition
        self.polylines = polylines
        self.cam: Camera | None = None
        self.env: StyleEnvironment | None = None
        self.geometry_builds = 0
        self._uniform_mesh = None
        self._uniform_key = None
        self._tile: FrameTile | None = None
        if polylines:
            self._line_vertices = np.concatenate([p.vertices for p in polylines])
        else:
            self._line_vertices = np.zeros((0, 3))
        self._local_offsets = np.concatenate(
            ([0], np.cumsum([len(p) for p in polylines]))).astype(np.int64)

    def line_cells(self) -> np.ndarray:
        """Sorted depth cells for this partition's polyline vertices."""
        d = vertex_depths(self.cam, self._line_vertices)
        return local_depth_sort(depth_cells(d, self.partition.vertex_id_offset))

    def build_mesh(self, radii_per_vertex: np.ndarray | None):
        """Tessellate the partition's tubes.

        With radii_per_vertex (rank-driven sizes) the mesh is rebuilt fresh;
        with None a uniform mid-radius mesh is built once and reused until
        sides or the radius range change.
        """
        env = self.env
        if radii_per_vertex is None:
            key = (env.sides, env.spec.mid_radius)
            if self._uniform_mesh is not None and self._uniform_key == key:
                return self._uniform_mesh
            radii_per_vertex = np.full(self.partition.vertex_count, env.spec.mid_radius)
            mesh = self._tessellate_all(radii_per_vertex)
            self._uniform_mesh = mesh
            self._uniform_key = key
            return mesh
        return self._tessellate_all(np.asarray(radii_per_vertex, dtype=np.float64))

    def _tessellate_all(self, radii: np.ndarray) -> object:
        meshes = []
        for k, line in enumerate(self.polylines):
            lo, hi = self._local_offsets[k], self._local_offsets[k + 1]
            meshes.append(tessellate_tube(
                line, radii[lo:hi], self.env.sides,
                vertex_id_offset=self.partition.vertex_id_offset + int(lo)))
        self.geometry_builds += 1
        return concat_meshes(meshes)

    def mesh_vertex_offset(self) -> int:
        return self.env.sides * self.partition.vertex_id_offset

    def mesh_cells(self, mesh) -> np.ndarray:
        """Sorted depth cells for the partition's tube-mesh vertices."""
        d = vertex_depths(self.cam, mesh.positions)
        return local_depth_sort(depth_cells(d, self.mesh_vertex_offset()))

    def render(self, mesh, mesh_ranks: np.ndarray, rank_max: int) -> FrameTile:
        env = self.env
        rgb, alpha = style_vertices(mesh_ranks, rank_max, env.spec, env.base_color)
        styles = np.concatenate([rgb, alpha[:, None]], axis=1)
        cam = self.cam
        if self._tile is None or (self._tile.width, self._tile.height) != (cam.width, cam.height):
            self._tile = new_tile(cam.width, cam.height, env.background)
        else:
            clear(self._tile, env.background)
        return rasterize_mesh(self._tile, mesh, styles, cam, self.partition.worker_id)


def _run_worker_frame(renderer: PartitionRenderer, chan: Channel) -> None:
    """One frame of the worker-side protocol (both sorting rounds + tile)."""
    part = renderer.partition
    spec = renderer.env.spec
    if "size" in spec.enabled:
        cells = renderer.line_cells()
        chan.send(MessageKind.DEPTH_CELLS_UPLOAD,
                  encode_depth_cells(part.worker_id, PASS_LINES, cells))
        ranks = _expect_index(chan, PASS_LINES)
        own = lookup_global_ranks(ranks, part.vertex_id_offset, part.vertex_count)
        radii = radii_for_polylines(own, ranks.size - 1, spec)
        mesh = renderer.build_mesh(radii)
    else:
        mesh = renderer.build_mesh(None)
    cells = renderer.mesh_cells(mesh)
    chan.send(MessageKind.DEPTH_CELLS_UPLOAD,
              encode_depth_cells(part.worker_id, PASS_MESH, cells))
    ranks = _expect_index(chan, PASS_MESH)
    own = lookup_global_ranks(ranks, renderer.mesh_vertex_offset(), mesh.vertex_count)
    tile = renderer.render(mesh, own, ranks.size - 1)
    chan.send(MessageKind.TILE_UPLOAD,
              encode_tile(part.worker_id, tile, renderer.geometry_builds))


def _expect_index(chan: Channel, pass_id: int) -> np.ndarray:
    kind, payload = chan.recv()
    if kind != MessageKind.HASH_INDEX_BROADCAST:
        raise EngineError(f"expected hash index, got {kind.name}")
    got_pass, ranks = decode_hash_index(payload)
    if got_pass != pass_id:
        raise EngineError(f"hash index for pass {got_pass}, expected {pass_id}")
    return ranks


def worker_entry(chan: Channel, partition: Partition, polylines: list[Polyline]) -> None:
    """Child-process main loop; exits on Shutdown or channel EOF."""
    renderer = PartitionRenderer(partition, polylines)
    try:
        while True:
            kind, payload = chan.recv()
            if kind == MessageKind.SHUTDOWN:
                break
            elif kind == MessageKind.CAMERA_SYNC:
                renderer.cam = decode_camera(payload)
            elif kind == MessageKind.MAPPING_UPDATE:
                renderer.env = decode_mapping(payload)
            elif kind == MessageKind.RENDER_FRAME:
                decode_render_frame(payload)
                _run_worker_frame(renderer, chan)
            else:
                raise EngineError(f"worker {partition.worker_id}: unexpected {kind.name}")
    except ChannelClosed:
        pass
    finally:
        chan.drop()


def _reader(index: int, chan: Channel, inbox: queue.Queue) -> None:
    """Pump one worker channel into the shared inbox; EOF posts a sentinel."""
    while True:
        try:
            kind, payload = chan.recv()
        except (ChannelClosed, OSError, ValueError):
            inbox.put((index, None, None))
            return
        inbox.put((index, kind, payload))


_kernels_warm = False


def warm_kernels() -> None:
    """Force JIT compilation of the numeric kernels before any fork/timing."""
    global _kernels_warm
    if _kernels_warm:
        return
    cells = local_depth_sort(depth_cells(np.array([0.5, 0.25]), 0))
    twoway_merge(cells, local_depth_sort(depth_cells(np.array([0.75]), 2)))
    line = Polyline(np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0]]), 0)
    mesh = tessellate_tube(line, np.array([0.1, 0.1]), 3)
    cam = Camera(position=np.array([0.0, 0.0, -4.0]), focal=np.array([0.0, 0.0, 0.5]),
                 up=np.array([0.0, 1.0, 0.0]), viewport=(8, 8))
    styles = np.tile(np.array([0.5, 0.5, 0.5, 1.0]), (mesh.vertex_count, 1))
    rasterize_mesh(new_tile(8, 8), mesh, styles, cam, 0)
    _kernels_warm = True


class Engine:
    """Sort-last parallel renderer over a dataset of polylines."""

    def __init__(self, dataset: Dataset, camera: Camera,
                 spec: MappingSpec | None = None,
                 config: EngineConfig | None = None):
        self.dataset = dataset
        self.cam = camera
        self.spec = spec if spec is not None else MappingSpec()
        self.config = config if config is not None else EngineConfig()
        self.frame_id = 0
        self.last_stats: FrameStats | None = None
        self._closed = False
        self._procs: list[multiprocessing.process.BaseProcess] = []
        self._chans: list[Channel] = []
        self._inbox: queue.Queue = queue.Queue()
        self._readers: list[threading.Thread] = []

        workers = self.config.workers
        parts = partition_ranges(dataset.vertex_counts, workers)
        self.partitions = parts
        self._renderer = PartitionRenderer(
            parts[0], dataset.polylines[parts[0].line_start:parts[0].line_end])

        warm_kernels()
        if workers > 1:
            ctx = multiprocessing.get_context("fork")
            for part in parts[1:]:
                master_end, worker_end = channel_pair()
                lines = dataset.polylines[part.line_start:part.line_end]
                proc = ctx.Process(target=worker_entry, args=(worker_end, part, lines),
                                   daemon=True, name=f"depthtubes-worker-{part.worker_id}")
                proc.start()
                worker_end.drop()
                self._procs.append(proc)
                self._chans.append(master_end)
            for i, chan in enumerate(self._chans):
                t = threading.Thread(target=_reader, args=(i, chan, self._inbox),
                                     daemon=True, name=f"depthtubes-reader-{i + 1}")
                t.start()
                self._readers.append(t)
            logger.info("engine started: %d workers, %d polylines, %d vertices",
                        workers, len(dataset.polylines), dataset.total_vertices)

    # -- interaction --

    @property
    def workers(self) -> int:
        return self.config.workers

    def set_camera(self, cam: Camera) -> None:
        self.cam = cam

    def set_viewport(self, width: int, height: int) -> None:
        self.cam = dataclasses.replace(self.cam, viewport=(int(width), int(height)))

    def rotate(self, dx_ndc: float, dy_ndc: float) -> None:
        self.cam = trackball_rotate(self.cam, dx_ndc, dy_ndc)

    def set_mapping(self, spec: MappingSpec) -> None:
        if not isinstance(spec, MappingSpec):
            raise TypeError("set_mapping expects a MappingSpec")
        self.spec = spec

    def handle_interaction(self, dx_ndc: float, dy_ndc: float):
        """Trackball rotate then render: the drag-to-frame path."""
        self.rotate(dx_ndc, dy_ndc)
        return self.render_frame()

    # -- rendering --

    def render_frame(self) -> tuple[FrameTile, FrameStats]:
        """Render one frame; returns the composited image and its stats."""
        if self._closed:
            raise EngineError("engine is closed")
        t0 = time.perf_counter()
        frame_id = self.frame_id
        self.frame_id += 1
        env = StyleEnvironment(spec=self.spec, base_color=self.config.base_color,
                               background=self.config.background, sides=self.config.sides)
        cam_payload = encode_camera(self.cam)
        env_payload = encode_mapping(env)
        frame_payload = encode_render_frame(frame_id)
        for i, chan in enumerate(self._chans):
            try:
                chan.send(MessageKind.CAMERA_SYNC, cam_payload)
                chan.send(MessageKind.MAPPING_UPDATE, env_payload)
                chan.send(MessageKind.RENDER_FRAME, frame_payload)
            except OSError as exc:
                raise EngineError(f"worker {i + 1} is gone: {exc}") from exc
        renderer = self._renderer
        renderer.cam = self.cam
        renderer.env = env

        sort_s = 0.0
        rounds = 0
        total_lines = self.dataset.total_vertices
        if "size" in self.spec.enabled:
            ts = time.perf_counter()
            index = self._sort_round(renderer.line_cells(), PASS_LINES, total_lines)
            sort_s += time.perf_counter() - ts
            rounds += 1
            own = lookup_global_ranks(index, renderer.partition.vertex_id_offset,
                                      renderer.partition.vertex_count)
            radii = radii_for_polylines(own, index.size - 1, self.spec)
            mesh = renderer.build_mesh(radii)
        else:
            mesh = renderer.build_mesh(None)

        ts = time.perf_counter()
        index = self._sort_round(renderer.mesh_cells(mesh), PASS_MESH,
                                 self.config.sides * total_lines)
        sort_s += time.perf_counter() - ts
        rounds += 1
        own = lookup_global_ranks(index, renderer.mesh_vertex_offset(), mesh.vertex_count)
        acc = renderer.render(mesh, own, index.size - 1)

        builds = renderer.geometry_builds
        for _ in self._chans:
            idx, kind, payload = self._inbox.get()
            if kind is None:
                raise EngineError(f"worker {idx + 1} channel closed mid-frame")
            if kind != MessageKind.TILE_UPLOAD:
                raise EngineError(f"expected tile upload, got {kind.name}")
            wid, tile, worker_builds = decode_tile(payload)
            composite_into(acc, tile)
            builds += worker_builds

        result = acc.copy()
        stats = FrameStats(
            frame_id=frame_id,
            width=self.cam.width,
            height=self.cam.height,
            workers=self.config.workers,
            frame_ms=(time.perf_counter() - t0) * 1000.0,
            sort_ms=sort_s * 1000.0,
            sort_rounds=rounds,
            geometry_builds=builds,
        )
        self.last_stats = stats
        return result, stats

    def _sort_round(self, own_cells: np.ndarray, pass_id: int, total: int) -> np.ndarray:
        """Merge sorted runs on arrival, build the rank table, broadcast it."""
        merged = own_cells
        for _ in self._chans:
            idx, kind, payload = self._inbox.get()
            if kind is None:
                raise EngineError(f"worker {idx + 1} channel closed mid-frame")
            if kind != MessageKind.DEPTH_CELLS_UPLOAD:
                raise EngineError(f"expected depth cells, got {kind.name}")
            _, got_pass, cells = decode_depth_cells(payload)
            if got_pass != pass_id:
                raise EngineError(f"depth cells for pass {got_pass}, expected {pass_id}")
            merged = twoway_merge(merged, cells)
        index = build_hash_index(merged, total)
        if self._chans:
            payload = encode_hash_index(pass_id, index)
            for i, chan in enumerate(self._chans):
                try:
                    chan.send(MessageKind.HASH_INDEX_BROADCAST, payload)
                except OSError as exc:
                    raise EngineError(f"worker {i + 1} is gone: {exc}") from exc
        return index

    # -- lifecycle --

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        for chan in self._chans:
            try:
                chan.send(MessageKind.SHUTDOWN)
            except OSError:
                pass
        for proc in self._procs:
            proc.join(timeout=10)
            if proc.is_alive():
                logger.warning("terminating unresponsive worker %s", proc.name)
                proc.terminate()
                proc.join(timeout=5)
        for chan in self._chans:
            try:
                chan.close()
            except OSError:
                pass

    def __enter__(self) -> "Engine":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
