"""Polyline datasets: loading, synthetic generation, bounds.

A dataset is an ordered list of polylines; the polyline (one tube) is the
minimal unit of work distribution, so vertices of one polyline never split
across partitions.  Global vertex ids are implied by concatenation order:
polyline 0 owns ids [0, n0), polyline 1 owns [n0, n0+n1), and so on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MIN_SEGMENT_LENGTH = 1e-9


class DatasetFormatError(ValueError):
    """Raised when a polyline text file cannot be parsed."""


@dataclass(frozen=True)
class Polyline:
    """An ordered chain of 3D vertices with a dataset-unique id."""

    vertices: np.ndarray  # (n, 3) float64
    id: int

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=np.float64)
        if verts.ndim != 2 or verts.shape[1] != 3:
            raise ValueError(f"polyline {self.id}: vertices must be (n, 3)")
        if verts.shape[0] < 2:
            raise ValueError(f"polyline {self.id}: needs at least 2 vertices")
        if self.id < 0:
            raise ValueError("polyline id must be non-negative")
        seglen = np.linalg.norm(np.diff(verts, axis=0), axis=1)
        if not np.all(seglen > MIN_SEGMENT_LENGTH):
            k = int(np.argmin(seglen))
            raise ValueError(
                f"polyline {self.id}: coincident consecutive vertices at segment {k}"
            )
        object.__setattr__(self, "vertices", verts)

    def __len__(self) -> int:
        return self.vertices.shape[0]


@dataclass(frozen=True)
class Dataset:
    """A bundle of polylines plus aggregate metadata."""

    polylines: list[Polyline]
    total_vertices: int = field(init=False)
    bounds: np.ndarray = field(init=False)  # (2, 3): min corner, max corner

    def __post_init__(self):
        if not self.polylines:
            raise ValueError("dataset has no polylines")
        for k, line in enumerate(self.polylines):
            if line.id != k:
                raise ValueError(f"polyline ids must be 0..n-1 in order, got {line.id} at {k}")
        total = sum(len(p) for p in self.polylines)
        lo = np.min([p.vertices.min(axis=0) for p in self.polylines], axis=0)
        hi = np.max([p.vertices.max(axis=0) for p in self.polylines], axis=0)
        object.__setattr__(self, "total_vertices", total)
        object.__setattr__(self, "bounds", np.stack([lo, hi]))

    @property
    def vertex_counts(self) -> np.ndarray:
        return np.array([len(p) for p in self.polylines], dtype=np.int64)


def load_dataset(path) -> Dataset:
    """Parse a polyline text file: one polyline per line, floats x0 y0 z0 x1 y1 z1 ...

    Lines starting with '#' are comments; blank lines are skipped.
    Raises DatasetFormatError naming the 1-based line number on malformed input.
    """
    polylines: list[Polyline] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            tokens = text.split()
            try:
                values = np.array([float(t) for t in tokens], dtype=np.float64)
            except ValueError:
                raise DatasetFormatError(
                    f"{path}: line {lineno}: non-numeric coordinate"
                ) from None
            if values.size % 3 != 0:
                raise DatasetFormatError(
                    f"{path}: line {lineno}: coordinate count {values.size} is not a multiple of 3"
                )
            if values.size < 6:
                raise DatasetFormatError(
                    f"{path}: line {lineno}: polyline has fewer than 2 vertices"
                )
            try:
                polylines.append(Polyline(values.reshape(-1, 3), id=len(polylines)))
            except ValueError as exc:
                raise DatasetFormatError(f"{path}: line {lineno}: {exc}") from None
    if not polylines:
        raise DatasetFormatError(f"{path}: no polylines")
    return Dataset(polylines)


def save_dataset(dataset: Dataset, path) -> None:
    """Write a dataset in the polyline text format accepted by load_dataset."""
    with open(path, "w") as fh:
        for line in dataset.polylines:
            fh.write(" ".join(repr(float(v)) for v in line.vertices.ravel()))
            fh.write("\n")


def generate_synthetic_bundle(count: int, vertices_per: int, seed: int) -> Dataset:
    """Generate a deterministic bundle of smooth perturbed helices in a unit-scale volume.

    Pure function of its arguments: the same (count, vertices_per, seed) always
    produces byte-identical vertex arrays.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if vertices_per < 2:
        raise ValueError("vertices_per must be >= 2")
    rng = np.random.default_rng(seed)
    s = np.linspace(0.0, 1.0, vertices_per)
    polylines = []
    for i in range(count):
        center = rng.uniform(-0.35, 0.35, size=3)
        axis = _random_unit(rng)
        side, up = _frame_for(axis)
        length = rng.uniform(0.3, 0.9)
        radius = rng.uniform(0.02, 0.12)
        turns = rng.uniform(0.5, 2.5)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        wobble_amp = rng.uniform(0.0, 0.03)
        wobble_freq = rng.uniform(0.5, 2.0)
        wobble_phase = rng.uniform(0.0, 2.0 * np.pi)
        angle = 2.0 * np.pi * turns * s + phase
        along = length * (s - 0.5)
        wobble = wobble_amp * np.sin(2.0 * np.pi * wobble_freq * s + wobble_phase)
        verts = (
            center
            + np.outer(along, axis)
            + np.outer(radius * np.cos(angle) + wobble, side)
            + np.outer(radius * np.sin(angle), up)
        )
        polylines.append(Polyline(verts, id=i))
    return Dataset(polylines)


def _random_unit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    n = np.linalg.norm(v)
    while n < 1e-12:
        v = rng.normal(size=3)
        n = np.linalg.norm(v)
    return v / n


def _frame_for(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Deterministic perpendicular pair: start from the world axis least
    # aligned with `axis` so the projection never degenerates.
    pick = np.zeros(3)
    pick[int(np.argmin(np.abs(axis)))] = 1.0
    side = pick - np.dot(pick, axis) * axis
    side /= np.linalg.norm(side)
    up = np.cross(axis, side)
    return side, up
