"""Identity-covariance Gaussian mixtures: exact density and seeded sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataio import write_csv

REFERENCE_MEANS = ((0.1, 0.0, 0.0, 0.0), (-0.1, 0.0, 0.0, 0.0))
REFERENCE_WEIGHTS = (11 / 20, 9 / 20)
# The second weight as printed; together they sum to about 0.97857.
LITERAL_WEIGHTS = (11 / 20, 9 / 21)


def stream_seed(seed: int, *keys: int) -> int:
    """A 64-bit seed for the stream identified by ``(seed, *keys)``."""
    ss = np.random.SeedSequence([int(seed), *(int(k) for k in keys)])
    return int(ss.generate_state(1, np.uint64)[0])


def make_rng(seed) -> np.random.Generator:
    """Philox generator from an int seed; a Generator passes through."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    """Mixture of unit-covariance normals ``sum_c w_c N(mu_c, I)``.

    With ``is_density=False`` the weights are kept exactly as given even if
    they do not sum to one; such a mixture can be evaluated but not sampled.
    """

    weights: np.ndarray
    means: np.ndarray
    is_density: bool = True
    m: int = field(init=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        mu = np.array(self.means, dtype=float)
        if mu.ndim == 1:
            mu = mu[:, None]
        if mu.shape[0] != w.shape[0]:
            raise ValueError(f"{w.shape[0]} weights for {mu.shape[0]} means")
        if w.size == 0 or np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        if self.is_density and abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        w.setflags(write=False)
        mu.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "m", mu.shape[1])

    def __eq__(self, other):
        if not isinstance(other, GaussianMixture):
            return NotImplemented
        return (
            self.is_density == other.is_density
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.means, other.means)
        )

    def __hash__(self):
        return hash((self.weights.tobytes(), self.means.tobytes(), self.is_density))

    @classmethod
    def normalized(cls, weights, means) -> "GaussianMixture":
        w = np.asarray(weights, dtype=float)
        return cls(w / w.sum(), means)

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "is_density": self.is_density,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GaussianMixture":
        return cls(d["weights"], d["means"], d.get("is_density", True))


def reference_mixture(literal_weights: bool = False) -> GaussianMixture:
    """The 4-D two-component test mixture with means ``(+-0.1, 0, 0, 0)``.

    By default the weights are ``(11/20, 9/20)``. ``literal_weights=True``
    returns ``(11/20, 9/21)`` as printed, which is not a probability density
    and is only good for evaluation.
    """
    if literal_weights:
        return GaussianMixture(LITERAL_WEIGHTS, REFERENCE_MEANS, is_density=False)
    return GaussianMixture(REFERENCE_WEIGHTS, REFERENCE_MEANS)


def standard_normal_mixture(m: int = 1) -> GaussianMixture:
    return GaussianMixture([1.0], [[0.0] * m])


def mixture_density(g: GaussianMixture, x):
    """Density of ``g`` at a point or at each row of an ``(n, m)`` array."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != g.m:
        raise ValueError(f"point dimension mismatch: mixture has m={g.m}, got shape {x.shape}")
    norm = (2.0 * math.pi) ** (-0.5 * g.m)
    total = np.zeros(x.shape[:-1])
    for w, mu in zip(g.weights, g.means):
        d = x - mu
        total = total + w * np.exp(-0.5 * np.sum(d * d, axis=-1))
    out = norm * total
    return float(out) if out.ndim == 0 else out


def sample_mixture(g: GaussianMixture, n: int, seed) -> np.ndarray:
    """Draw ``n`` points: a component by weight, then its mean plus N(0, I)."""
    if not g.is_density:
        raise ValueError("cannot sample from a mixture whose weights do not sum to 1")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = make_rng(seed)
    k = len(g.weights)
    comp = rng.choice(k, size=n, p=g.weights) if k > 1 else np.zeros(n, dtype=int)
    return g.means[comp] + rng.standard_normal((n, g.m))


def export_csv(points, path):
    """Write a sampled dataset in the dataset CSV format."""
    return write_csv(path, points)
