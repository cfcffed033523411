"""Exact k-nearest-neighbour search with a kd-tree.

The tree splits at the median of the coordinate with the widest spread and
stops at 16 points per leaf. Nodes keep their bounding boxes so a query can
prune with the box distance instead of only the splitting plane. Results are
ordered by ``(distance, instance index)``, which makes ties deterministic.
"""

from __future__ import annotations

import heapq
import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

LEAF_SIZE = 16

# Relative slack on pruning, so rounding in the box bound never drops a tie.
_PRUNE_SLACK = 1e-9


def as_points(points, name: str = "dataset") -> np.ndarray:
    """Coerce to a finite ``(n, m)`` float array with ``n >= 1``."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array of points, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise ValueError(f"{name} is empty")
    if arr.shape[1] < 1:
        raise ValueError(f"{name} has zero-dimensional points")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return np.ascontiguousarray(arr)


def default_threads() -> int:
    """Thread count from ``SRKDE_THREADS``, falling back to 1."""
    try:
        return max(1, int(os.environ.get("SRKDE_THREADS", "1")))
    except ValueError:
        return 1


def _sq_distances(points: np.ndarray, q: np.ndarray) -> np.ndarray:
    # Coordinates accumulated left to right; brute-force checks rely on this order.
    diff = points[:, 0] - q[0]
    acc = diff * diff
    for j in range(1, points.shape[1]):
        diff = points[:, j] - q[j]
        acc += diff * diff
    return acc


class KdTreeIndex:
    """Immutable kd-tree over an ``(n, m)`` array of points.

    Parameters
    ----------
    points : array_like, shape (n, m)
        The indexed instances. A private copy is kept.
    leaf_size : int
        Maximum number of points in a leaf, unless every point in the node is
        identical (such a node cannot be split).
    """

    def __init__(self, points, leaf_size: int = LEAF_SIZE):
        data = as_points(points)
        if leaf_size < 1:
            raise ValueError("leaf_size must be >= 1")
        self.data = data
        self.data.setflags(write=False)
        self.n, self.m = data.shape
        self.leaf_size = leaf_size
        self._build()

    def _build(self):
        data = self.data
        perm = np.arange(self.n)
        start, stop, left, right, lo_box, hi_box = [], [], [], [], [], []

        def new_node(a, b):
            pts = data[perm[a:b]]
            start.append(a)
            stop.append(b)
            left.append(-1)
            right.append(-1)
            lo_box.append(pts.min(axis=0))
            hi_box.append(pts.max(axis=0))
            return len(start) - 1

        stack = [new_node(0, self.n)]
        while stack:
            node = stack.pop()
            a, b = start[node], stop[node]
            if b - a <= self.leaf_size:
                continue
            spread = hi_box[node] - lo_box[node]
            dim = int(np.argmax(spread))
            if spread[dim] == 0.0:
                continue
            mid = (a + b) // 2
            block = perm[a:b]
            order = np.argpartition(data[block, dim], mid - a, kind="introselect")
            perm[a:b] = block[order]
            left[node] = new_node(a, mid)
            right[node] = new_node(mid, b)
            stack.append(right[node])
            stack.append(left[node])

        self._perm = perm
        self._sorted = np.ascontiguousarray(data[perm])
        self._start = np.array(start)
        self._stop = np.array(stop)
        self._left = np.array(left)
        self._right = np.array(right)
        self._lo = np.array(lo_box)
        self._hi = np.array(hi_box)

    @property
    def node_count(self) -> int:
        return len(self._start)

    def leaves(self) -> list[np.ndarray]:
        """Instance indices held by each leaf."""
        return [
            self._perm[self._start[i]:self._stop[i]]
            for i in range(self.node_count)
            if self._left[i] < 0
        ]

    def _box_sq_dist(self, node: int, q: np.ndarray) -> float:
        gap = np.maximum(self._lo[node] - q, 0.0) + np.maximum(q - self._hi[node], 0.0)
        return float(gap @ gap)

    def k_nearest(self, q, k: int, exclude_index: int | None = None):
        """The ``k`` nearest instances to ``q``.

        Returns
        -------
        indices : ndarray of int, shape (k,)
        distances : ndarray of float, shape (k,)
            Sorted by ascending distance, ties by ascending index. The instance
            ``exclude_index``, if given, is never returned.
        """
        q = np.asarray(q, dtype=float).reshape(-1)
        if q.shape[0] != self.m:
            raise ValueError(f"query has dimension {q.shape[0]}, index has m={self.m}")
        available = self.n - (exclude_index is not None)
        if exclude_index is not None and not 0 <= exclude_index < self.n:
            raise ValueError(f"exclude_index {exclude_index} out of range")
        if not 1 <= k <= available:
            raise ValueError(f"k must be in [1, {available}], got {k}")

        best_idx = np.empty(0, dtype=np.intp)
        best_dist = np.empty(0)
        bound = math.inf
        heap = [(self._box_sq_dist(0, q), 0)]
        while heap:
            box_d2, node = heapq.heappop(heap)
            if box_d2 > bound:
                break
            lchild = self._left[node]
            if lchild >= 0:
                for child in (lchild, self._right[node]):
                    d2 = self._box_sq_dist(child, q)
                    if d2 <= bound:
                        heapq.heappush(heap, (d2, child))
                continue
            a, b = self._start[node], self._stop[node]
            idx = self._perm[a:b]
            dist = np.sqrt(_sq_distances(self._sorted[a:b], q))
            if exclude_index is not None:
                keep = idx != exclude_index
                idx, dist = idx[keep], dist[keep]
            idx = np.concatenate([best_idx, idx])
            dist = np.concatenate([best_dist, dist])
            order = np.lexsort((idx, dist))[:k]
            best_idx, best_dist = idx[order], dist[order]
            if len(best_idx) == k:
                worst = best_dist[-1]
                bound = worst * worst * (1.0 + _PRUNE_SLACK) + 1e-300
        return best_idx, best_dist

    def kth_distances(self, k: int, threads: int | None = None) -> np.ndarray:
        """Distance from every instance to its ``k``-th nearest other instance.

        Queries are processed one leaf at a time: all points of a leaf share a
        scan over the other leaves in order of box-to-box distance.
        """
        if not 1 <= k <= self.n - 1:
            raise ValueError(f"k must be in [1, {self.n - 1}] (self excluded), got {k}")
        threads = default_threads() if threads is None else max(1, int(threads))
        leaves = np.flatnonzero(self._left < 0)
        lo, hi = self._lo[leaves], self._hi[leaves]

        def one(li):
            return self._leaf_kth(leaves, lo, hi, li, k)

        out = np.empty(self.n)
        if threads == 1:
            parts = [one(li) for li in range(len(leaves))]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(one, range(len(leaves))))
        for qidx, kth in parts:
            out[qidx] = kth
        return out

    def _leaf_kth(self, leaves, lo, hi, li, k):
        node = leaves[li]
        a, b = self._start[node], self._stop[node]
        queries, qidx = self._sorted[a:b], self._perm[a:b]
        gap = np.maximum(lo - hi[li], 0.0) + np.maximum(lo[li] - hi, 0.0)
        box_d2 = np.sum(gap * gap, axis=1)
        best_d = np.empty((len(qidx), 0))
        best_i = np.empty((len(qidx), 0), dtype=np.intp)
        bound = math.inf
        for lj in np.argsort(box_d2, kind="stable"):
            if box_d2[lj] > bound:
                break
            other = leaves[lj]
            c, d = self._start[other], self._stop[other]
            pts, pidx = self._sorted[c:d], self._perm[c:d]
            diff = queries[:, None, 0] - pts[None, :, 0]
            acc = diff * diff
            for j in range(1, self.m):
                diff = queries[:, None, j] - pts[None, :, j]
                acc += diff * diff
            dist = np.sqrt(acc)
            dist[qidx[:, None] == pidx[None, :]] = math.inf
            cand_d = np.concatenate([best_d, dist], axis=1)
            cand_i = np.concatenate([best_i, np.broadcast_to(pidx, dist.shape)], axis=1)
            order = np.lexsort((cand_i, cand_d), axis=-1)[:, :k]
            best_d = np.take_along_axis(cand_d, order, axis=1)
            best_i = np.take_along_axis(cand_i, order, axis=1)
            if best_d.shape[1] == k:
                worst = float(best_d[:, -1].max())
                bound = worst * worst * (1.0 + _PRUNE_SLACK) + 1e-300
        return qidx, best_d[:, k - 1]


def build_index(points, leaf_size: int = LEAF_SIZE) -> KdTreeIndex:
    """Build a :class:`KdTreeIndex` over ``points``."""
    return KdTreeIndex(points, leaf_size=leaf_size)


def k_nearest(idx: KdTreeIndex, q, k: int, exclude_index: int | None = None):
    return idx.k_nearest(q, k, exclude_index=exclude_index)


def kth_distances(idx: KdTreeIndex, k: int, threads: int | None = None) -> np.ndarray:
    return idx.kth_distances(k, threads=threads)
