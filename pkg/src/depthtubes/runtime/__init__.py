"""Process runtime: partitioning, wire protocol, parallel engine, serving."""

from .partition import Partition, partition_ranges
from .engine import Engine, EngineConfig, EngineError, FrameStats

__all__ = [
    "Partition",
    "partition_ranges",
    "Engine",
    "EngineConfig",
    "EngineError",
    "FrameStats",
]
