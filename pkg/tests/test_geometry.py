from __future__ import annotations

import numpy as np
import pytest

from depthtubes.geometry import (Dataset, DatasetFormatError, Polyline,
                                 generate_synthetic_bundle, load_dataset,
                                 save_dataset)


def write(tmp_path, text):
    p = tmp_path / "lines.txt"
    p.write_text(text)
    return p


class TestPolyline:
    def test_requires_two_vertices(self):
        with pytest.raises(ValueError):
            Polyline(np.zeros((1, 3)), 0)

    def test_rejects_coincident_consecutive(self):
        verts = np.array([[0.0, 0, 0], [0, 0, 0], [1, 0, 0]])
        with pytest.raises(ValueError):
            Polyline(verts, 0)

    def test_rejects_near_coincident_below_threshold(self):
        verts = np.array([[0.0, 0, 0], [5e-10, 0, 0]])
        with pytest.raises(ValueError):
            Polyline(verts, 0)


class TestLoadDataset:
    def test_minimal_two_point_line(self, tmp_path):
        ds = load_dataset(write(tmp_path, "0 0 0 1 0 0\n"))
        assert len(ds.polylines) == 1
        assert ds.total_vertices == 2
        np.testing.assert_array_equal(ds.bounds, [[0, 0, 0], [1, 0, 0]])

    def test_empty_file_errors(self, tmp_path):
        with pytest.raises(DatasetFormatError, match="no polylines"):
            load_dataset(write(tmp_path, ""))

    def test_comment_only_file_errors(self, tmp_path):
        with pytest.raises(DatasetFormatError, match="no polylines"):
            load_dataset(write(tmp_path, "# nothing here\n\n"))

    def test_total_vertices_sums_counts(self, tmp_path):
        # 5 + 7 + 9 points; oracle: 21
        rng = np.random.default_rng(0)
        lines = []
        for count in (5, 7, 9):
            pts = np.cumsum(rng.normal(size=(count, 3)) + 0.5, axis=0)
            lines.append(" ".join(f"{x:.6f}" for x in pts.ravel()))
        ds = load_dataset(write(tmp_path, "\n".join(lines) + "\n"))
        assert ds.total_vertices == 21
        assert [len(p) for p in ds.polylines] == [5, 7, 9]

    def test_ids_in_file_order(self, tmp_path):
        ds = load_dataset(write(tmp_path, "0 0 0 1 0 0\n0 1 0 1 1 0\n"))
        assert [p.id for p in ds.polylines] == [0, 1]

    def test_non_numeric_names_line(self, tmp_path):
        path = write(tmp_path, "0 0 0 1 0 0\n0 0 zero 1 0 0\n")
        with pytest.raises(DatasetFormatError, match="line 2"):
            load_dataset(path)

    def test_wrong_coordinate_count_names_line(self, tmp_path):
        path = write(tmp_path, "# header\n0 0 0 1 0\n")
        with pytest.raises(DatasetFormatError, match="line 2"):
            load_dataset(path)

    def test_single_point_line_errors(self, tmp_path):
        with pytest.raises(DatasetFormatError, match="line 1"):
            load_dataset(write(tmp_path, "1 2 3\n"))

    def test_comments_and_blanks_skipped(self, tmp_path):
        text = "# comment\n\n0 0 0 1 0 0\n  # indented comment\n0 1 0 1 1 0\n"
        ds = load_dataset(write(tmp_path, text))
        assert len(ds.polylines) == 2

    def test_roundtrip_through_save(self, tmp_path):
        ds = generate_synthetic_bundle(7, 13, seed=42)
        out = tmp_path / "round.txt"
        save_dataset(ds, out)
        back = load_dataset(out)
        assert back.total_vertices == ds.total_vertices
        for a, b in zip(ds.polylines, back.polylines):
            np.testing.assert_allclose(a.vertices, b.vertices, atol=1e-12)


class TestDataset:
    def test_ids_must_be_contiguous(self):
        a = Polyline(np.array([[0.0, 0, 0], [1, 0, 0]]), 0)
        b = Polyline(np.array([[0.0, 1, 0], [1, 1, 0]]), 2)
        with pytest.raises(ValueError):
            Dataset([a, b])

    def test_empty_errors(self):
        with pytest.raises(ValueError):
            Dataset([])

    def test_bounds_contain_every_vertex(self):
        ds = generate_synthetic_bundle(20, 30, seed=3)
        lo, hi = ds.bounds
        for p in ds.polylines:
            assert np.all(p.vertices >= lo - 1e-12)
            assert np.all(p.vertices <= hi + 1e-12)


class TestSyntheticBundle:
    def test_minimal(self):
        ds = generate_synthetic_bundle(1, 2, seed=0)
        assert ds.total_vertices == 2

    def test_deterministic_replay(self):
        a = generate_synthetic_bundle(100, 50, seed=7)
        b = generate_synthetic_bundle(100, 50, seed=7)
        for pa, pb in zip(a.polylines, b.polylines):
            np.testing.assert_array_equal(pa.vertices, pb.vertices)

    def test_seeds_differ(self):
        a = generate_synthetic_bundle(3, 10, seed=1)
        b = generate_synthetic_bundle(3, 10, seed=2)
        assert not np.array_equal(a.polylines[0].vertices, b.polylines[0].vertices)

    def test_count_times_vertices_per(self):
        # workload-parity scale: 9635 x 150 = 1,445,250 (hand-multiplied)
        # checked cheaply via the counts, not by materializing that bundle here
        ds = generate_synthetic_bundle(31, 17, seed=9)
        assert ds.total_vertices == 31 * 17
        assert 9635 * 150 == 1_445_250

    def test_validates_args(self):
        with pytest.raises(ValueError):
            generate_synthetic_bundle(0, 10, seed=0)
        with pytest.raises(ValueError):
            generate_synthetic_bundle(5, 1, seed=0)
