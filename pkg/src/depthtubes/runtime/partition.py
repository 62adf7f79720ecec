"""Static block partitioning of a dataset across workers.

Polylines are split into contiguous index ranges: every worker gets
floor(n / P) lines starting at floor(n / P) * workerId, and the last worker
additionally absorbs the remainder.  Because ranges are contiguous and
ordered, each worker also owns a contiguous span of global vertex ids, whose
start offset is the prefix sum of the preceding vertex counts — that offset is
all a worker needs to mint globally unique vertex ids without communication.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Partition:
    """One worker's slice of the dataset."""

    worker_id: int
    line_start: int        # first polyline index, inclusive
    line_end: int          # last polyline index, exclusive
    vertex_id_offset: int  # global id of this partition's first vertex
    vertex_count: int      # polyline vertices owned by this partition

    @property
    def line_count(self) -> int:
        return self.line_end - self.line_start

    @property
    def is_empty(self) -> bool:
        return self.line_end <= self.line_start


def partition_ranges(vertex_counts: np.ndarray, workers: int) -> list[Partition]:
    """Split `len(vertex_counts)` polylines across `workers` partitions.

    vertex_counts[i] is the vertex count of polyline i; the array fixes both
    the number of lines and the vertex id offsets.
    """
    counts = np.asarray(vertex_counts, dtype=np.int64)
    if counts.ndim != 1:
        raise ValueError("vertex_counts must be one-dimensional")
    if counts.size and counts.min() < 2:
        raise ValueError("every polyline needs at least 2 vertices")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    n = int(counts.size)
    base = n // workers
    offsets = np.concatenate(([0], np.cumsum(counts)))
    parts: list[Partition] = []
    for wid in range(workers):
        start = base * wid
        end = base * (wid + 1) if wid < workers - 1 else n
        parts.append(Partition(
            worker_id=wid,
            line_start=start,
            line_end=end,
            vertex_id_offset=int(offsets[start]),
            vertex_count=int(offsets[end] - offsets[start]),
        ))
        if end <= start:
            logger.info("partition %d is empty (%d lines across %d workers)",
                        wid, n, workers)
    return parts
