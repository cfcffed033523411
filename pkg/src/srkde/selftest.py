"""Quick internal consistency checks, runnable without the test suite."""

from __future__ import annotations

import math

import numpy as np

from .estimator import FixedEstimator, estimate_fz0, srkde_with_sigmas, super_radius_transform
from .kernel import SuperRadiusKernel, normalization_check
from .neighbors import build_index
from .special import unit_ball_volume


def _normalization():
    worst = max(
        abs(normalization_check(m, s) - 1.0)
        for m in (1, 2, 3, 4, 8)
        for s in (0.005, 0.1, 1.0, 10.0)
    )
    return worst < 1e-9, f"max |mass - 1| = {worst:.2e}"


def _identity(rng):
    worst = 0.0
    for m in (1, 2, 4, 8):
        for _ in range(10):
            data = rng.uniform(-1, 1, size=(50, m))
            v = rng.uniform(-0.5, 0.5, size=m)
            est = FixedEstimator(data, rng.uniform(0.5, 2.0))
            a = est(v)
            b = estimate_fz0(super_radius_transform(data, v), est.sigma) / unit_ball_volume(m)
            worst = max(worst, abs(a - b) / max(abs(b), 1e-300))
    return worst < 1e-12, f"max relative gap = {worst:.2e}"


def _gaussian_reduction():
    k = SuperRadiusKernel(1, 0.7)
    x = np.linspace(-3.5, 3.5, 1001)[:, None]
    gauss = np.exp(-0.5 * (x[:, 0] / 0.7) ** 2) / (0.7 * math.sqrt(2 * math.pi))
    err = float(np.max(np.abs(k(x) - gauss)))
    return err < 1e-12, f"max abs error = {err:.2e}"


def _kdtree(rng):
    data = rng.standard_normal((300, 4))
    data[10] = data[11]
    idx = build_index(data)
    for _ in range(40):
        q = rng.standard_normal(4)
        d = np.sqrt(np.sum((data - q) ** 2, axis=1))
        expect = np.lexsort((np.arange(len(d)), d))[:8]
        got, _ = idx.k_nearest(q, 8)
        if not np.array_equal(got, expect):
            return False, "mismatch against brute force"
    return True, "40 queries match brute force"


def _srkde_equal(rng):
    data = rng.standard_normal((200, 3))
    fixed = FixedEstimator.from_sigma(data, 0.4)
    model = srkde_with_sigmas(data, fixed.sigma)
    v = rng.standard_normal(3) * 0.3
    a, b = fixed(v), model(v)
    gap = abs(a - b) / b
    return gap < 1e-12, f"relative gap = {gap:.2e}"


def run_selftest(seed: int = 0) -> list[tuple[str, bool, str]]:
    rng = np.random.default_rng(seed)
    checks = [
        ("kernel normalization", _normalization),
        ("fixed estimator / super-radius identity", lambda: _identity(rng)),
        ("m=1 Gaussian reduction", _gaussian_reduction),
        ("kd-tree exactness", lambda: _kdtree(rng)),
        ("SRKDE equal-bandwidth reduction", lambda: _srkde_equal(rng)),
    ]
    return [(name, *fn()) for name, fn in checks]
