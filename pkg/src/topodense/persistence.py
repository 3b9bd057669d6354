"""0-dimensional Vietoris-Rips persistence of finite point clouds.

Every connected component is born at radius 0, so a barcode is fully described
by its death-times. These coincide with the edge lengths of a Euclidean minimum
spanning tree, which is what this module computes (dense Prim, O(n^2)).

Edge attribution under distance ties follows the strict order
``(length, min(i, j), max(i, j))``. The multiset of death-times does not depend
on that choice, the (i, j) pairs reported for tied edges do.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "MSTEdge",
    "Barcode",
    "as_point_cloud",
    "pairwise_distances",
    "minimum_spanning_tree",
    "barcode",
    "death_times",
    "is_beta_connected",
    "barcode_backward",
    "batch_death_times",
    "batch_is_beta_connected",
]


@dataclass(frozen=True)
class MSTEdge:
    i: int
    j: int
    length: float


@dataclass(frozen=True)
class Barcode:
    """Death-times of a point cloud, one per MST edge, sorted ascending."""

    edges: tuple[MSTEdge, ...]
    n_points: int

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def deaths(self) -> np.ndarray:
        return np.array([e.length for e in self.edges], dtype=np.float64)

    @property
    def pairs(self) -> np.ndarray:
        return np.array([(e.i, e.j) for e in self.edges], dtype=np.intp).reshape(-1, 2)


def as_point_cloud(points) -> np.ndarray:
    """Validate ``points`` and return them as a float64 array of shape (n, d).

    A 1-d input is read as n points on a line.
    """
    if isinstance(points, np.ndarray):
        arr = points
    else:
        rows = list(points)
        if rows and all(np.ndim(r) == 1 for r in rows):
            lengths = {len(r) for r in rows}
            if len(lengths) > 1:
                raise ValueError(f"points have mismatched dimensions {sorted(lengths)}")
        arr = np.asarray(rows, dtype=np.float64)
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"expected a point cloud of shape (n, d), got shape {arr.shape}")
    n, d = arr.shape
    if n < 1:
        raise ValueError("point cloud is empty")
    if d < 1:
        raise ValueError("points must have at least one coordinate")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point cloud contains NaN or Inf coordinates")
    return arr


def pairwise_distances(points) -> np.ndarray:
    """Symmetric (n, n) matrix of Euclidean distances with zero diagonal."""
    z = as_point_cloud(points)
    diff = z[:, None, :] - z[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    np.fill_diagonal(dist, 0.0)
    return dist


def minimum_spanning_tree(dist: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Dense Prim on a distance matrix.

    Returns
    -------
    pairs : (n-1, 2) int array with ``i < j`` in each row, in insertion order.
    lengths : (n-1,) float array.
    """
    dist = np.asarray(dist, dtype=np.float64)
    n = dist.shape[0]
    if n == 0:
        raise ValueError("distance matrix is empty")
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = dist[0].copy()
    src = np.zeros(n, dtype=np.intp)
    idx = np.arange(n)
    pairs = np.empty((n - 1, 2), dtype=np.intp)
    lengths = np.empty(n - 1, dtype=np.float64)
    for step in range(n - 1):
        out = idx[~in_tree]
        cand = best[out]
        tied = out[cand == cand.min()]
        if len(tied) > 1:
            lo = np.minimum(src[tied], tied)
            hi = np.maximum(src[tied], tied)
            v = tied[np.lexsort((hi, lo))[0]]
        else:
            v = tied[0]
        u = src[v]
        pairs[step] = (min(u, v), max(u, v))
        lengths[step] = best[v]
        in_tree[v] = True

        d = dist[v]
        closer = ~in_tree & (d < best)
        # equal length: keep the lexicographically smaller edge
        tie = ~in_tree & (d == best)
        if tie.any():
            new_lo, new_hi = np.minimum(v, idx), np.maximum(v, idx)
            old_lo, old_hi = np.minimum(src, idx), np.maximum(src, idx)
            tie &= (new_lo < old_lo) | ((new_lo == old_lo) & (new_hi < old_hi))
        upd = closer | tie
        best[upd] = d[upd]
        src[upd] = v
    return pairs, lengths


def barcode(points) -> Barcode:
    """0-dim Vietoris-Rips barcode: the n-1 MST edges sorted by (length, i, j)."""
    z = as_point_cloud(points)
    pairs, lengths = minimum_spanning_tree(pairwise_distances(z))
    order = np.lexsort((pairs[:, 1], pairs[:, 0], lengths)) if len(lengths) else []
    edges = tuple(
        MSTEdge(int(pairs[k, 0]), int(pairs[k, 1]), float(lengths[k])) for k in order
    )
    return Barcode(edges=edges, n_points=z.shape[0])


def death_times(points) -> np.ndarray:
    return barcode(points).deaths


def is_beta_connected(points, beta: float) -> bool:
    """True iff every MST edge is strictly shorter than ``beta``.

    Coincident points (death-time 0) count as connected.
    """
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    deaths = death_times(points)
    return bool(np.all(deaths < beta))


def barcode_backward(
    points, bc: Barcode, upstream: Sequence[float]
) -> tuple[np.ndarray, bool]:
    """Pull per-death upstream scalars back to point coordinates.

    For a death attributed to edge (i, j) with unit vector u from z_i to z_j,
    the death's gradient is -u at z_i and +u at z_j. Zero-length edges get a
    zero gradient; the returned flag is True if any of them had a nonzero
    upstream value.

    Returns
    -------
    grad : (n, d) array
    degenerate : bool
    """
    z = as_point_cloud(points)
    up = np.asarray(upstream, dtype=np.float64).reshape(-1)
    if up.shape[0] != len(bc):
        raise ValueError(f"expected {len(bc)} upstream values, got {up.shape[0]}")
    if bc.n_points != z.shape[0]:
        raise ValueError("barcode was computed for a different number of points")
    grad = np.zeros_like(z)
    degenerate = False
    for edge, g in zip(bc.edges, up):
        if g == 0.0:
            continue
        diff = z[edge.j] - z[edge.i]
        norm = np.sqrt(diff @ diff)
        if norm == 0.0:
            degenerate = True
            continue
        unit = diff / norm
        grad[edge.i] -= g * unit
        grad[edge.j] += g * unit
    return grad, degenerate


def batch_death_times(clouds, threads: int = 1) -> np.ndarray:
    """Sorted death-times of many same-sized clouds at once.

    Parameters
    ----------
    clouds : array of shape (N, b, d)
    threads : split the N clouds into this many contiguous chunks and run
        them on a thread pool. Rows are independent, so the output does not
        depend on the thread count.

    Returns
    -------
    (N, b-1) array, each row ascending.
    """
    z = np.asarray(clouds, dtype=np.float64)
    if z.ndim != 3:
        raise ValueError(f"expected shape (N, b, d), got {z.shape}")
    N, b, _ = z.shape
    if b < 1:
        raise ValueError("clouds must contain at least one point")
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    if threads > 1 and N > 1:
        chunks = np.array_split(z, min(threads, N))
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            return np.concatenate(list(pool.map(_batch_prim, chunks)))
    return _batch_prim(z)


def _batch_prim(z: np.ndarray) -> np.ndarray:
    N, b, _ = z.shape
    diff = z[:, :, None, :] - z[:, None, :, :]
    dist = np.sqrt(np.einsum("nijk,nijk->nij", diff, diff))
    rows = np.arange(N)
    in_tree = np.zeros((N, b), dtype=bool)
    in_tree[:, 0] = True
    best = dist[:, 0, :].copy()
    deaths = np.empty((N, b - 1), dtype=np.float64)
    for step in range(b - 1):
        masked = np.where(in_tree, np.inf, best)
        v = np.argmin(masked, axis=1)
        deaths[:, step] = masked[rows, v]
        in_tree[rows, v] = True
        np.minimum(best, dist[rows, v, :], out=best)
    deaths.sort(axis=1)
    return deaths


def batch_is_beta_connected(clouds, beta: float) -> np.ndarray:
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    deaths = batch_death_times(clouds)
    return np.all(deaths < beta, axis=1)
