"""Density estimators built on the super-radius kernel.

* :class:`FixedEstimator` uses one bandwidth ``sigma = lam * n**(-1/3)``.
* :class:`SRKDEModel` gives instance ``i`` its own bandwidth
  ``beta * R_k(s_i)**m / k``, with ``R_k`` the distance to the k-th nearest
  other instance.
* :func:`approximate_function` is the regression analogue of the fixed
  estimator for function values sampled at uniform density ``rho``.

All evaluation happens at an explicit point ``v``. Data are translated so
that ``v`` sits at the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .kernel import SuperRadiusKernel, squared_norm, super_radius_exponent
from .neighbors import KdTreeIndex, as_points, build_index
from .special import check_dimension, log_kernel_constant, unit_ball_volume

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


def _query_points(v, m: int) -> tuple[np.ndarray, bool]:
    v = np.asarray(v, dtype=float)
    single = v.ndim <= 1
    v2 = v.reshape(1, -1) if single else v
    if v2.ndim != 2 or v2.shape[1] != m:
        raise ValueError(f"query dimension mismatch: data has m={m}, got shape {v.shape}")
    return v2, single


def super_radius_transform(data, center) -> np.ndarray:
    """Super-radii ``z_i = ||s_i - center||**m``."""
    data = as_points(data)
    m = check_dimension(data.shape[1])
    center = np.asarray(center, dtype=float).reshape(-1)
    if center.shape[0] != m:
        raise ValueError(f"center has dimension {center.shape[0]}, data has m={m}")
    r2 = squared_norm(data - center)
    return np.power(r2, 0.5 * m)


def _half_line_exponent(z: np.ndarray, sigma: float) -> np.ndarray:
    # z**2 / (2 sigma**2) by the same log route as the kernel, saturating alike.
    pos = z > 0
    with np.errstate(divide="ignore"):
        arg = 2.0 * np.log(np.where(pos, z, 1.0)) - math.log(2.0 * sigma * sigma)
    out = np.zeros_like(z)
    ok = pos & (arg <= 700.0)
    out[ok] = np.exp(arg[ok])
    out[pos & ~ok] = np.inf
    return out


def estimate_fz0(z, sigma: float) -> float:
    """Half-line kernel estimate of the super-radius density at zero.

    ``(1/n) sum sqrt(2)/(sqrt(pi) sigma) exp(-z_i**2 / (2 sigma**2))``. The
    factor 2 relative to a plain Gaussian kernel compensates for ``z >= 0``.
    """
    if not sigma > 0:
        raise ValueError(f"bandwidth must be > 0, got {sigma}")
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.size == 0:
        raise ValueError("no super-radius samples")
    if np.any(z < 0):
        raise ValueError("super-radii must be nonnegative")
    peak = _SQRT_2_OVER_PI / sigma
    return float(np.mean(peak * np.exp(-_half_line_exponent(z, sigma))))


@dataclass(frozen=True)
class FixedEstimator:
    """Fixed-bandwidth estimator with ``sigma = lam * n**(-1/3)``."""

    data: np.ndarray
    lam: float
    kernel: SuperRadiusKernel = field(init=False, repr=False)

    def __post_init__(self):
        data = as_points(self.data)
        if not self.lam > 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "kernel", SuperRadiusKernel(data.shape[1], self.sigma))

    @classmethod
    def from_sigma(cls, data, sigma: float) -> "FixedEstimator":
        """Estimator whose bandwidth is ``sigma`` for this ``n``."""
        n = np.asarray(data).shape[0]
        return cls(data, sigma * n ** (1.0 / 3.0))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def m(self) -> int:
        return self.data.shape[1]

    @property
    def sigma(self) -> float:
        return self.lam * self.data.shape[0] ** (-1.0 / 3.0)

    def __call__(self, v):
        return estimate_fixed(self, v)


def estimate_fixed(e: FixedEstimator, v):
    """``(1/n) sum_i K(s_i - v)`` at one point or at each row of ``v``."""
    v2, single = _query_points(v, e.m)
    out = np.array([np.mean(e.kernel(e.data - q)) for q in v2])
    return float(out[0]) if single else out


def default_k(n: int) -> int:
    """``ceil(sqrt(n))``, capped at ``n - 1``."""
    return max(1, min(n - 1, math.ceil(math.sqrt(n))))


def default_beta(n: int, beta0: float = 1.0) -> float:
    """Smoothing parameter ``beta0 * n**(2/3)``."""
    return beta0 * n ** (2.0 / 3.0)


def default_eps_clamp(data: np.ndarray, k: int) -> float:
    """Bandwidth floor ``1e-12 * (diameter**m / k + 1)``.

    The diameter is taken as the bounding-box diagonal, an upper bound that
    costs O(n m).
    """
    m = data.shape[1]
    diag = float(np.sqrt(np.sum((data.max(axis=0) - data.min(axis=0)) ** 2)))
    if diag == 0:
        scale = 0.0
    else:
        scale = math.exp(min(m * math.log(diag) - math.log(k), 690.0))
    return 1e-12 * (scale + 1.0)


@dataclass(frozen=True)
class SRKDEModel:
    """Variable-bandwidth super-radius estimator.

    Build with :func:`build_srkde`. ``sigmas[i]`` is
    ``max(beta * R_k(s_i)**m / k, eps_clamp)``.
    """

    data: np.ndarray
    k: int
    beta: float
    sigmas: np.ndarray
    index: KdTreeIndex = field(repr=False)
    eps_clamp: float

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def m(self) -> int:
        return self.data.shape[1]

    def __call__(self, v, k_prime: int | None = None):
        return estimate_srkde(self, v, k_prime)


def srkde_bandwidths(kth: np.ndarray, m: int, k: int, beta: float, eps_clamp: float) -> np.ndarray:
    return np.maximum(beta * np.power(kth, m) / k, eps_clamp)


def build_srkde(
    data,
    k: int | None = None,
    beta: float | None = None,
    *,
    beta0: float = 1.0,
    eps_clamp: float | None = None,
    threads: int | None = None,
) -> SRKDEModel:
    """Fit an :class:`SRKDEModel`.

    ``k`` defaults to :func:`default_k` and ``beta`` to ``beta0 * n**(2/3)``.
    """
    data = as_points(data)
    n, m = data.shape
    check_dimension(m)
    if n < 2:
        raise ValueError("SRKDE needs at least 2 instances (R_k is undefined for n=1)")
    k = default_k(n) if k is None else int(k)
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must be in [1, {n - 1}], got {k}")
    beta = default_beta(n, beta0) if beta is None else float(beta)
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    eps = default_eps_clamp(data, k) if eps_clamp is None else float(eps_clamp)
    if not eps > 0:
        raise ValueError("eps_clamp must be > 0")
    index = build_index(data)
    kth = index.kth_distances(k, threads=threads)
    sigmas = srkde_bandwidths(kth, m, k, beta, eps)
    sigmas.setflags(write=False)
    return SRKDEModel(index.data, k, beta, sigmas, index, eps)


def srkde_with_sigmas(data, sigmas, k: int = 1, beta: float = 1.0, eps_clamp: float = 1e-300) -> SRKDEModel:
    """An :class:`SRKDEModel` with caller-supplied bandwidths.

    Used to load persisted models and to force all bandwidths equal.
    ``k`` and ``beta`` are recorded, not applied.
    """
    data = as_points(data)
    sig = np.broadcast_to(np.asarray(sigmas, dtype=float), (data.shape[0],)).copy()
    if not np.all(sig > 0):
        raise ValueError("bandwidths must be > 0")
    sig.setflags(write=False)
    index = build_index(data)
    return SRKDEModel(index.data, int(k), float(beta), sig, index, float(eps_clamp))


def _neighbour_subset(model: SRKDEModel, q: np.ndarray, k_prime: int | None):
    if k_prime is None or k_prime >= model.n:
        if k_prime is not None and k_prime > model.n:
            raise ValueError(f"k_prime must be in [1, {model.n}], got {k_prime}")
        return model.data - q, model.sigmas
    if k_prime < 1:
        raise ValueError(f"k_prime must be >= 1, got {k_prime}")
    idx, _ = model.index.k_nearest(q, k_prime)
    return model.data[idx] - q, model.sigmas[idx]


def _srkde_log_terms(model: SRKDEModel, q: np.ndarray, k_prime: int | None) -> np.ndarray:
    diff, sig = _neighbour_subset(model, q, k_prime)
    log_peak = log_kernel_constant(model.m, 1.0) - np.log(sig)
    return log_peak - super_radius_exponent(squared_norm(diff), model.m, sig)


def estimate_srkde(model: SRKDEModel, v, k_prime: int | None = None):
    """SRKDE value at ``v``.

    With ``k_prime`` only the ``k_prime`` nearest instances to ``v`` enter the
    sum; the divisor stays ``n``.
    """
    v2, single = _query_points(v, model.m)
    inv_vol = 1.0 / unit_ball_volume(model.m)
    out = np.empty(len(v2))
    for j, q in enumerate(v2):
        diff, sig = _neighbour_subset(model, q, k_prime)
        peak = inv_vol * _SQRT_2_OVER_PI / sig
        out[j] = np.sum(peak * np.exp(-super_radius_exponent(squared_norm(diff), model.m, sig))) / model.n
    return float(out[0]) if single else out


def log_estimate_srkde(model: SRKDEModel, v, k_prime: int | None = None):
    """Natural log of :func:`estimate_srkde`, accumulated in log space."""
    v2, single = _query_points(v, model.m)
    out = np.array([
        logsumexp(_srkde_log_terms(model, q, k_prime)) - math.log(model.n) for q in v2
    ])
    return float(out[0]) if single else out


def approximate_function(points, values, rho: float, sigma: float, v) -> float:
    """Kernel approximation ``sum_i f(s_i)/rho * K(s_i - v)``.

    ``rho`` is the sampling density, i.e. ``n`` over the volume of the
    sampled region; it replaces the ``1/n`` of the density estimators.
    """
    if not rho > 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    points = as_points(points, "samples")
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.shape[0] != points.shape[0]:
        raise ValueError(f"{values.shape[0]} values for {points.shape[0]} sample points")
    kern = SuperRadiusKernel(points.shape[1], sigma)
    v2, single = _query_points(v, points.shape[1])
    out = np.array([np.sum(values / rho * kern(points - q)) for q in v2])
    return float(out[0]) if single else out
