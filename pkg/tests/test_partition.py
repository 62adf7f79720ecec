from __future__ import annotations

import numpy as np
import pytest

from depthtubes.runtime import Partition, partition_ranges


def counts(*vals):
    return np.asarray(vals, dtype=np.int64)


class TestPartitionRanges:
    def test_even_split(self):
        parts = partition_ranges(counts(2, 2, 2, 2, 2, 2, 2, 2), 4)
        assert [(p.line_start, p.line_end) for p in parts] == [(0, 2), (2, 4), (4, 6), (6, 8)]
        assert [p.vertex_id_offset for p in parts] == [0, 4, 8, 12]
        assert [p.vertex_count for p in parts] == [4, 4, 4, 4]

    def test_remainder_goes_to_last(self):
        parts = partition_ranges(counts(*[3] * 10), 4)
        assert [(p.line_start, p.line_end) for p in parts] == [(0, 2), (2, 4), (4, 6), (6, 10)]
        assert parts[-1].line_count == 4

    def test_more_workers_than_lines(self):
        parts = partition_ranges(counts(2, 2, 2), 4)
        assert len(parts) == 4
        assert [p.line_count for p in parts] == [0, 0, 0, 3]
        assert parts[0].is_empty and not parts[3].is_empty

    def test_offsets_are_prefix_sums(self):
        vc = counts(2, 5, 3, 7, 2, 9, 4)
        parts = partition_ranges(vc, 3)
        for p in parts:
            assert p.vertex_id_offset == int(vc[: p.line_start].sum())
            assert p.vertex_count == int(vc[p.line_start : p.line_end].sum())

    def test_disjoint_cover(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            n = int(rng.integers(1, 40))
            workers = int(rng.integers(1, 9))
            vc = rng.integers(2, 12, size=n)
            parts = partition_ranges(vc, workers)
            assert len(parts) == workers
            assert parts[0].line_start == 0
            assert parts[-1].line_end == n
            for a, b in zip(parts, parts[1:]):
                assert a.line_end == b.line_start
                assert b.vertex_id_offset == a.vertex_id_offset + a.vertex_count
            assert sum(p.vertex_count for p in parts) == int(vc.sum())
            assert [p.worker_id for p in parts] == list(range(workers))

    def test_single_worker_takes_all(self):
        parts = partition_ranges(counts(4, 4, 4), 1)
        assert len(parts) == 1
        assert (parts[0].line_start, parts[0].line_end) == (0, 3)
        assert parts[0].vertex_count == 12

    def test_validation(self):
        with pytest.raises(ValueError):
            partition_ranges(counts(2, 2), 0)
        with pytest.raises(ValueError):
            partition_ranges(counts(2, 1, 2), 2)  # a polyline needs 2+ vertices
        with pytest.raises(ValueError):
            partition_ranges(np.zeros((2, 2), dtype=np.int64), 2)


class TestPartitionObject:
    def test_properties(self):
        p = Partition(worker_id=1, line_start=3, line_end=7, vertex_id_offset=30, vertex_count=28)
        assert p.line_count == 4
        assert not p.is_empty
        assert Partition(0, 5, 5, 50, 0).is_empty
