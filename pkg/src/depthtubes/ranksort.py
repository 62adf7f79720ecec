"""Distributed depth ranking: local sort, iterative two-way merge, rank index.

Each worker sorts the depth cells of its own partition; the master merges
sorted runs as they arrive and scatters the merged order into a dense
id -> global-rank table (the "hash index") that makes per-vertex rank lookup
O(1).  Cells are (vd, id) records where id is the vertex's original global
index, so the sorted position of every cell can be recovered no matter where
the sort moved it.

Ties in vd are broken by ascending id.  That total order is what makes the
master's fold over arriving partitions independent of arrival order.
"""

from __future__ import annotations

import numpy as np
from numba import njit

CELL_DTYPE = np.dtype([("vd", "<f8"), ("id", "<i8")])
RANK_DTYPE = np.dtype("<i4")  # dense rank table entries; 4 bytes each on the wire


def depth_cells(depths: np.ndarray, id_offset: int = 0) -> np.ndarray:
    """Pack per-vertex depths into cells with ids id_offset .. id_offset+n-1."""
    depths = np.asarray(depths, dtype=np.float64)
    cells = np.empty(depths.shape[0], dtype=CELL_DTYPE)
    cells["vd"] = depths
    cells["id"] = np.arange(id_offset, id_offset + depths.shape[0], dtype=np.int64)
    return cells


def local_depth_sort(cells: np.ndarray) -> np.ndarray:
    """Sort cells by (vd ascending, id ascending).  Returns a new array."""
    cells = np.asarray(cells, dtype=CELL_DTYPE)
    if not np.all(np.isfinite(cells["vd"])):
        raise ValueError("non-finite depth value in cell array")
    order = np.lexsort((cells["id"], cells["vd"]))
    return cells[order]


def _check_sorted(cells: np.ndarray, name: str) -> None:
    vd = cells["vd"]
    ids = cells["id"]
    bad = (vd[1:] < vd[:-1]) | ((vd[1:] == vd[:-1]) & (ids[1:] < ids[:-1]))
    if bad.any():
        raise ValueError(f"{name} cell array has an adjacent inversion (not sorted)")


@njit(cache=True)
def _merge_kernel(a, b, out):  # pragma: no cover - exercised via twoway_merge
    i = 0
    j = 0
    k = 0
    na = a.shape[0]
    nb = b.shape[0]
    while i < na and j < nb:
        av = a[i].vd
        bv = b[j].vd
        if av < bv or (av == bv and a[i].id <= b[j].id):
            out[k] = a[i]
            i += 1
        else:
            out[k] = b[j]
            j += 1
        k += 1
    while i < na:
        out[k] = a[i]
        i += 1
        k += 1
    while j < nb:
        out[k] = b[j]
        j += 1
        k += 1


def twoway_merge(acc: np.ndarray, incoming: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
    """Merge two individually sorted cell arrays into one sorted array.

    Stable: on equal (vd, id) keys, acc elements come first.  `out` may supply
    a preallocated buffer (at least len(acc)+len(incoming) cells) so the
    master can reuse one merge buffer across frames.
    """
    acc = np.asarray(acc, dtype=CELL_DTYPE)
    incoming = np.asarray(incoming, dtype=CELL_DTYPE)
    _check_sorted(acc, "acc")
    _check_sorted(incoming, "incoming")
    n = acc.shape[0] + incoming.shape[0]
    if out is None:
        out = np.empty(n, dtype=CELL_DTYPE)
    elif out.shape[0] < n:
        raise ValueError(f"merge output buffer too small: {out.shape[0]} < {n}")
    target = out[:n]
    _merge_kernel(acc, incoming, target)
    return target


def build_hash_index(merged: np.ndarray, total_points: int | None = None) -> np.ndarray:
    """Scatter a merged cell array into a dense id -> global rank table.

    merged must be sorted and its ids a permutation of 0..total_points-1.
    """
    merged = np.asarray(merged, dtype=CELL_DTYPE)
    _check_sorted(merged, "merged")
    n = merged.shape[0]
    if total_points is None:
        total_points = n
    if n != total_points:
        raise ValueError(f"expected {total_points} cells, got {n}")
    ids = merged["id"]
    if n and (ids.min() < 0 or ids.max() >= total_points):
        raise ValueError("cell id out of range for rank table")
    ranks = np.full(total_points, -1, dtype=RANK_DTYPE)
    ranks[ids] = np.arange(n, dtype=RANK_DTYPE)
    if n and (ranks < 0).any():
        raise ValueError("duplicate cell ids: ranks would not be a permutation")
    return ranks


def lookup_global_ranks(ranks: np.ndarray, id_offset: int, count: int) -> np.ndarray:
    """Slice the contiguous rank block for ids id_offset .. id_offset+count-1."""
    if id_offset < 0 or count < 0 or id_offset + count > ranks.shape[0]:
        raise ValueError(
            f"rank lookup range [{id_offset}, {id_offset + count}) exceeds table of {ranks.shape[0]}"
        )
    return ranks[id_offset : id_offset + count]
