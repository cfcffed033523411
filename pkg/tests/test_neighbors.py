import time

import numpy as np
import pytest

from conftest import brute_kth, brute_knn
from srkde.neighbors import build_index, k_nearest, kth_distances


def test_single_point():
    idx = build_index([[1.0, 2.0]])
    assert idx.n == 1
    i, d = k_nearest(idx, [5.0, 5.0], 1)
    assert i.tolist() == [0]
    assert d[0] == pytest.approx(5.0)


def test_hand_example():
    idx = build_index([[0.0], [1.0], [3.0]])
    i, d = idx.k_nearest([0.9], 2)
    assert i.tolist() == [1, 0]
    assert d == pytest.approx([0.1, 0.9])


def test_self_exclusion():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [5.0, 5.0]])
    idx = build_index(pts)
    i, d = idx.k_nearest(pts[0], 1, exclude_index=0)
    assert i.tolist() == [1]
    assert d.tolist() == [1.0]


def test_ties_break_by_index():
    pts = np.array([[1.0], [-1.0], [1.0], [-1.0], [2.0]])
    i, _ = build_index(pts).k_nearest([0.0], 4)
    assert i.tolist() == [0, 1, 2, 3]


def test_kth_distances_hand():
    idx = build_index([[0.0], [1.0], [2.0], [3.0]])
    assert kth_distances(idx, 1).tolist() == [1.0, 1.0, 1.0, 1.0]
    assert kth_distances(idx, 2).tolist() == [2.0, 1.0, 1.0, 2.0]


@pytest.mark.parametrize("m", [2, 4, 8])
@pytest.mark.parametrize("k", [1, 5, 32])
def test_queries_match_brute_force(rng, m, k):
    pts = rng.normal(size=(2000, m))
    idx = build_index(pts)
    for q in rng.normal(size=(30, m)) * 1.2:
        i, d = idx.k_nearest(q, k)
        bi, bd = brute_knn(pts, q, k)
        assert i.tolist() == bi
        assert d.tolist() == bd


def test_kth_distances_match_brute_force(rng):
    pts = rng.uniform(size=(1000, 4))
    assert kth_distances(build_index(pts), 16).tolist() == brute_kth(pts, 16)


def test_duplicates(rng):
    base = rng.integers(0, 4, size=(200, 3)).astype(float)
    idx = build_index(base)
    for q in rng.integers(0, 4, size=(20, 3)).astype(float):
        i, d = idx.k_nearest(q, 10)
        bi, bd = brute_knn(base, q, 10)
        assert i.tolist() == bi and d.tolist() == bd
    assert kth_distances(idx, 3).tolist() == brute_kth(base, 3)


def test_all_identical_points():
    pts = np.ones((100, 2))
    idx = build_index(pts)
    assert kth_distances(idx, 5).tolist() == [0.0] * 100
    leaves = idx.leaves()
    assert sorted(np.concatenate(leaves).tolist()) == list(range(100))


def test_every_point_in_exactly_one_leaf(rng):
    idx = build_index(rng.normal(size=(1234, 3)))
    leaves = idx.leaves()
    flat = np.concatenate(leaves)
    assert sorted(flat.tolist()) == list(range(1234))
    assert max(len(leaf) for leaf in leaves) <= 16


def test_monotone_in_k(rng):
    idx = build_index(rng.normal(size=(300, 4)))
    prev = idx.kth_distances(1)
    for k in (2, 5, 9, 20):
        cur = idx.kth_distances(k)
        assert np.all(cur >= prev)
        prev = cur


def test_permutation_consistency(rng):
    pts = rng.normal(size=(500, 4))
    perm = rng.permutation(500)
    a = build_index(pts).kth_distances(7)
    b = build_index(pts[perm]).kth_distances(7)
    assert np.array_equal(a[perm], b)
    q = rng.normal(size=4)
    _, da = build_index(pts).k_nearest(q, 12)
    _, db = build_index(pts[perm]).k_nearest(q, 12)
    assert np.array_equal(da, db)


def test_deterministic_across_threads(rng):
    pts = rng.normal(size=(600, 4))
    a = build_index(pts).kth_distances(5, threads=1)
    b = build_index(pts).kth_distances(5, threads=4)
    assert np.array_equal(a, b)


def test_errors():
    idx = build_index([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
    with pytest.raises(ValueError):
        idx.k_nearest([0.0, 0.0], 4)
    with pytest.raises(ValueError):
        idx.k_nearest([0.0, 0.0], 3, exclude_index=0)
    with pytest.raises(ValueError):
        idx.k_nearest([0.0, 0.0], 0)
    with pytest.raises(ValueError, match="dimension"):
        idx.k_nearest([0.0], 1)
    with pytest.raises(ValueError):
        idx.kth_distances(3)
    with pytest.raises(ValueError):
        build_index(np.empty((0, 2)))


def _best_build_time(pts, reps=3):
    best = float("inf")
    for _ in range(reps):
        t = time.perf_counter()
        build_index(pts)
        best = min(best, time.perf_counter() - t)
    return best


@pytest.mark.slow
def test_build_time_subquadratic(rng):
    small = _best_build_time(rng.normal(size=(100_000, 4)))
    large = _best_build_time(rng.normal(size=(200_000, 4)))
    assert large / small < 3
