from __future__ import annotations

import numpy as np
import pytest

from depthtubes.compositor import composite_all, composite_into, composite_pair
from depthtubes.raster import DEPTH_SENTINEL, NO_WORKER, new_tile


def random_tile(rng, w=12, h=9, fill=0.6):
    """A tile whose pixels are randomly covered fragments or untouched background."""
    t = new_tile(w, h)
    covered = rng.random((h, w)) < fill
    t.color[covered] = rng.integers(0, 256, size=(covered.sum(), 4), dtype=np.uint8)
    t.depth[covered] = rng.random(covered.sum(), dtype=np.float32) * 100.0
    t.provenance[covered] = rng.integers(0, 8, size=covered.sum(), dtype=np.uint16)
    return t


def tiles_equal(a, b) -> bool:
    return (np.array_equal(a.color, b.color) and np.array_equal(a.depth, b.depth)
            and np.array_equal(a.provenance, b.provenance))


def one_pixel_tile(depth, worker, color=(200, 0, 0, 255)):
    t = new_tile(1, 1)
    t.color[0, 0] = color
    t.depth[0, 0] = depth
    t.provenance[0, 0] = worker
    return t


class TestPairSemantics:
    def test_nearer_fragment_wins(self):
        a = one_pixel_tile(5.0, 1, (10, 0, 0, 255))
        b = one_pixel_tile(3.0, 2, (0, 20, 0, 255))
        out = composite_pair(a, b)
        assert out.depth[0, 0] == np.float32(3.0)
        assert out.provenance[0, 0] == 2
        np.testing.assert_array_equal(out.color[0, 0], [0, 20, 0, 255])

    def test_depth_tie_lower_provenance_wins(self):
        a = one_pixel_tile(5.0, 3, (10, 0, 0, 255))
        b = one_pixel_tile(5.0, 1, (0, 20, 0, 255))
        assert composite_pair(a, b).provenance[0, 0] == 1
        assert composite_pair(b, a).provenance[0, 0] == 1

    def test_empty_tile_is_identity(self):
        rng = np.random.default_rng(3)
        t = random_tile(rng)
        e = new_tile(t.width, t.height)
        assert tiles_equal(composite_pair(t, e), t)
        assert tiles_equal(composite_pair(e, t), t)

    def test_pair_is_pure(self):
        rng = np.random.default_rng(4)
        a, b = random_tile(rng), random_tile(rng)
        ca, cb = a.copy(), b.copy()
        composite_pair(a, b)
        assert tiles_equal(a, ca) and tiles_equal(b, cb)

    def test_into_mutates_accumulator_only(self):
        rng = np.random.default_rng(5)
        a, b = random_tile(rng), random_tile(rng)
        cb = b.copy()
        want = composite_pair(a, b)
        composite_into(a, b)
        assert tiles_equal(a, want)
        assert tiles_equal(b, cb)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            composite_pair(new_tile(4, 4), new_tile(4, 5))

    def test_result_depth_is_pixelwise_min(self):
        rng = np.random.default_rng(6)
        a, b = random_tile(rng), random_tile(rng)
        out = composite_pair(a, b)
        np.testing.assert_array_equal(out.depth, np.minimum(a.depth, b.depth))


class TestAlgebra:
    def test_commutative_random(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            a, b = random_tile(rng), random_tile(rng)
            assert tiles_equal(composite_pair(a, b), composite_pair(b, a))

    def test_associative_random(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            a, b, c = (random_tile(rng) for _ in range(3))
            lhs = composite_pair(composite_pair(a, b), c)
            rhs = composite_pair(a, composite_pair(b, c))
            assert tiles_equal(lhs, rhs)

    def test_idempotent(self):
        rng = np.random.default_rng(9)
        t = random_tile(rng)
        assert tiles_equal(composite_pair(t, t), t)


class TestCompositeAll:
    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            composite_all([])

    def test_single(self):
        rng = np.random.default_rng(10)
        t = random_tile(rng)
        assert tiles_equal(composite_all([t]), t)

    def test_disjoint_coverage_unions(self):
        left = new_tile(4, 2)
        right = new_tile(4, 2)
        left.color[:, :2] = [1, 2, 3, 255]
        left.depth[:, :2] = 1.0
        left.provenance[:, :2] = 0
        right.color[:, 2:] = [4, 5, 6, 255]
        right.depth[:, 2:] = 2.0
        right.provenance[:, 2:] = 1
        out = composite_all([left, right])
        np.testing.assert_array_equal(out.provenance, [[0, 0, 1, 1]] * 2)
        np.testing.assert_array_equal(out.depth, [[1, 1, 2, 2]] * 2)
        assert np.all(out.color[:, :2] == [1, 2, 3, 255])
        assert np.all(out.color[:, 2:] == [4, 5, 6, 255])

    def test_order_independent(self):
        rng = np.random.default_rng(11)
        tiles = [random_tile(rng) for _ in range(5)]
        base = composite_all(tiles)
        for _ in range(5):
            perm = list(rng.permutation(5))
            assert tiles_equal(composite_all([tiles[i] for i in perm]), base)

    def test_uncovered_pixels_keep_sentinels(self):
        out = composite_all([new_tile(3, 3), new_tile(3, 3)])
        assert np.all(out.depth == DEPTH_SENTINEL)
        assert np.all(out.provenance == NO_WORKER)
