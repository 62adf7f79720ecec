"""Frame-time benchmarking across worker counts."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from ..camera import Camera
from ..geometry import Dataset
from ..stylemap import MappingSpec
from .engine import Engine, EngineConfig

logger = logging.getLogger(__name__)

# per-frame trackball step: keeps every timed frame a realistic interaction
ROTATE_STEP = 0.005


@dataclass(frozen=True)
class BenchRecord:
    workers: int
    frame_ms: float      # mean full-frame wall time
    sort_ms: float       # mean time spent in the global sorting rounds
    speedup: float       # t(P=1) / t(P)
    efficiency: float    # speedup / P
    mapping_mode: str    # none | single | multiple
    width: int
    height: int
    frames: int


def mapping_mode(spec: MappingSpec) -> str:
    n = len(spec.enabled)
    return "none" if n == 0 else ("single" if n == 1 else "multiple")


def benchmark_run(dataset: Dataset, camera: Camera, spec: MappingSpec,
                  worker_counts: list[int], frames_per_sample: int,
                  config: EngineConfig | None = None) -> list[BenchRecord]:
    """Time full interactive frames for each worker count.

    Each sample spins up a fresh engine, renders one untimed warmup frame,
    then times frames_per_sample frames, rotating the camera by a fixed step
    before each so no frame can coast on cached geometry or sort results.
    The P=1 baseline is always measured (prepended when absent) since speedup
    and efficiency are relative to it.
    """
    if frames_per_sample < 1:
        raise ValueError("frames_per_sample must be >= 1")
    if not worker_counts:
        raise ValueError("worker_counts must not be empty")
    counts = list(worker_counts)
    if 1 not in counts:
        counts.insert(0, 1)

    base = config if config is not None else EngineConfig()
    mode = mapping_mode(spec)
    samples: dict[int, tuple[float, float]] = {}
    for workers in counts:
        cfg = EngineConfig(workers=workers, sides=base.sides,
                           base_color=base.base_color, background=base.background)
        with Engine(dataset, camera, spec, cfg) as engine:
            engine.handle_interaction(ROTATE_STEP, 0.0)  # warmup, untimed
            frame_total = 0.0
            sort_total = 0.0
            for _ in range(frames_per_sample):
                _, stats = engine.handle_interaction(ROTATE_STEP, 0.0)
                frame_total += stats.frame_ms
                sort_total += stats.sort_ms
        frame_mean = frame_total / frames_per_sample
        sort_mean = sort_total / frames_per_sample
        samples[workers] = (frame_mean, sort_mean)
        # sort fraction is informational: schedulers differ, so it is logged, not asserted
        logger.info("bench P=%d: %.1f ms/frame, %.1f ms sorting (fraction %.3f)",
                    workers, frame_mean, sort_mean, sort_mean / frame_mean)

    t1 = samples[1][0]
    records = []
    for workers in counts:
        frame_ms, sort_ms = samples[workers]
        speedup = t1 / frame_ms
        records.append(BenchRecord(
            workers=workers,
            frame_ms=frame_ms,
            sort_ms=sort_ms,
            speedup=speedup,
            efficiency=speedup / workers,
            mapping_mode=mode,
            width=camera.width,
            height=camera.height,
            frames=frames_per_sample,
        ))
    return records
