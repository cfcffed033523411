import math

import numpy as np
import pytest


def brute_knn(points, q, k, exclude=None):
    """Reference k-NN: plain Python distances, sorted by (distance, index)."""
    q = [float(x) for x in q]
    scored = []
    for i, p in enumerate(np.asarray(points).tolist()):
        if i == exclude:
            continue
        acc = 0.0
        for a, b in zip(p, q):
            acc += (a - b) * (a - b)
        scored.append((math.sqrt(acc), i))
    scored.sort()
    top = scored[:k]
    return [i for _, i in top], [d for d, _ in top]


def brute_kth(points, k):
    pts = np.asarray(points)
    return [brute_knn(pts, pts[i], k, exclude=i)[1][-1] for i in range(len(pts))]


@pytest.fixture
def rng():
    return np.random.default_rng(20070918)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
