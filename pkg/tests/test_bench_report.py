from __future__ import annotations

import io

import numpy as np
import pytest

from depthtubes.camera import frame_bounds
from depthtubes.geometry import generate_synthetic_bundle
from depthtubes.runtime import EngineConfig
from depthtubes.runtime.bench import BenchRecord, benchmark_run, mapping_mode
from depthtubes.runtime.report import (TABLE_COLUMNS, render_bench_figures,
                                       write_bench_table)
from depthtubes.stylemap import MappingSpec


@pytest.fixture(scope="module")
def records():
    ds = generate_synthetic_bundle(12, 8, seed=3)
    cam = frame_bounds(ds.bounds, viewport=(64, 48))
    spec = MappingSpec(enabled=frozenset({"color"}))
    return benchmark_run(ds, cam, spec, worker_counts=[1, 2], frames_per_sample=2)


class TestMappingMode:
    def test_modes(self):
        assert mapping_mode(MappingSpec(enabled=frozenset())) == "none"
        assert mapping_mode(MappingSpec(enabled=frozenset({"size"}))) == "single"
        assert mapping_mode(MappingSpec(enabled=frozenset({"size", "alpha"}))) == "multiple"


class TestBenchmarkRun:
    def test_record_fields(self, records):
        assert [r.workers for r in records] == [1, 2]
        for r in records:
            assert r.frame_ms > 0
            assert r.sort_ms >= 0
            assert r.frame_ms >= r.sort_ms
            assert r.mapping_mode == "single"  # color alone drives one mapping
            assert (r.width, r.height) == (64, 48)
            assert r.frames == 2

    def test_baseline_row_is_unity(self, records):
        assert records[0].speedup == pytest.approx(1.0)
        assert records[0].efficiency == pytest.approx(1.0)

    def test_efficiency_is_speedup_over_workers(self, records):
        for r in records:
            assert r.efficiency == pytest.approx(r.speedup / r.workers, abs=1e-12)

    def test_speedup_is_relative_to_single_worker(self, records):
        t1 = records[0].frame_ms
        for r in records:
            assert r.speedup == pytest.approx(t1 / r.frame_ms, rel=1e-9)

    def test_missing_baseline_gets_prepended(self):
        ds = generate_synthetic_bundle(8, 6, seed=4)
        cam = frame_bounds(ds.bounds, viewport=(48, 32))
        out = benchmark_run(ds, cam, MappingSpec(), worker_counts=[2],
                            frames_per_sample=1)
        assert [r.workers for r in out] == [1, 2]

    def test_validation(self):
        ds = generate_synthetic_bundle(8, 6, seed=4)
        cam = frame_bounds(ds.bounds, viewport=(48, 32))
        with pytest.raises(ValueError):
            benchmark_run(ds, cam, MappingSpec(), worker_counts=[], frames_per_sample=1)
        with pytest.raises(ValueError):
            benchmark_run(ds, cam, MappingSpec(), worker_counts=[1], frames_per_sample=0)

    def test_config_sides_respected(self):
        ds = generate_synthetic_bundle(6, 6, seed=5)
        cam = frame_bounds(ds.bounds, viewport=(32, 32))
        out = benchmark_run(ds, cam, MappingSpec(), worker_counts=[1],
                            frames_per_sample=1, config=EngineConfig(sides=3))
        assert len(out) == 1


class TestReport:
    def test_table_layout(self, records):
        buf = io.StringIO()
        write_bench_table(records, buf)
        lines = buf.getvalue().strip().split("\n")
        assert lines[0].startswith("# resolution 64x48, 2 frames")
        assert lines[1].split("\t") == list(TABLE_COLUMNS)
        assert len(lines) == 2 + len(records)
        first = lines[2].split("\t")
        assert first[0] == "1"
        assert float(first[3]) == pytest.approx(1.0)
        assert first[5] == "single"

    def test_table_round_trips_through_float_parse(self, records):
        buf = io.StringIO()
        write_bench_table(records, buf)
        for line, rec in zip(buf.getvalue().strip().split("\n")[2:], records):
            cols = line.split("\t")
            assert int(cols[0]) == rec.workers
            assert float(cols[1]) == pytest.approx(rec.frame_ms, abs=0.05)
            assert float(cols[4]) == pytest.approx(rec.efficiency, abs=0.005)

    def test_figures_written(self, records, tmp_path):
        from pathlib import Path
        paths = [Path(p) for p in render_bench_figures(records, tmp_path)]
        assert len(paths) == 3
        names = {p.name for p in paths}
        assert names == {"time_vs_workers.png", "speedup_vs_workers.png",
                         "efficiency_vs_workers.png"}
        for p in paths:
            raw = p.read_bytes()
            assert raw[:8] == b"\x89PNG\r\n\x1a\n"
            assert len(raw) > 1000

    def test_record_is_frozen(self):
        r = BenchRecord(workers=1, frame_ms=1.0, sort_ms=0.5, speedup=1.0,
                        efficiency=1.0, mapping_mode="none", width=8, height=8, frames=1)
        with pytest.raises(AttributeError):
            r.workers = 2
