"""The super-radius kernel

    K(x) = sqrt(2) Gamma(m/2+1) / (pi**((m+1)/2) sigma) * exp(-||x||**(2m) / (2 sigma**2))

evaluated in log space so that large ``m`` does not overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .special import (
    check_dimension,
    kernel_constant,
    log_kernel_constant,
    sphere_surface_area,
)

# exp(700) is close to the largest finite double; past it the exponent saturates.
_EXP_SATURATION = 700.0

# Radial quadrature is cut where the integrand has decayed by exp(-TAIL_EXPONENT).
TAIL_EXPONENT = 40.0


def super_radius_exponent(sq_dist, m: int, sigma) -> np.ndarray:
    """Return ``||x||**(2m) / (2 sigma**2)`` given squared distances ``||x||**2``.

    The power is formed as ``exp(m*log(||x||**2) - log(2 sigma**2))``. Arguments
    above 700 saturate to ``inf``; zero distance gives exactly 0. ``sigma`` may
    be a scalar or broadcast against ``sq_dist``.
    """
    sq_dist = np.asarray(sq_dist, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    pos = sq_dist > 0
    with np.errstate(divide="ignore"):
        arg = m * np.log(np.where(pos, sq_dist, 1.0)) - np.log(2.0 * sigma * sigma)
    arg = np.broadcast_to(arg, np.broadcast_shapes(sq_dist.shape, sigma.shape))
    pos = np.broadcast_to(pos, arg.shape)
    out = np.zeros(arg.shape)
    finite = pos & (arg <= _EXP_SATURATION)
    out[finite] = np.exp(arg[finite])
    out[pos & (arg > _EXP_SATURATION)] = np.inf
    return out


def squared_norm(x) -> np.ndarray:
    """Row-wise ``sum(x**2)`` accumulated coordinate by coordinate."""
    x = np.asarray(x, dtype=float)
    acc = x[..., 0] * x[..., 0]
    for j in range(1, x.shape[-1]):
        acc = acc + x[..., j] * x[..., j]
    return acc


@dataclass(frozen=True)
class SuperRadiusKernel:
    """Super-radius kernel of dimension ``m`` and bandwidth ``sigma``.

    ``c`` caches the peak value :func:`~srkde.special.kernel_constant`.
    """

    m: int
    sigma: float
    c: float = field(init=False, repr=False)
    log_c: float = field(init=False, repr=False)

    def __post_init__(self):
        m = check_dimension(self.m)
        sigma = float(self.sigma)
        if not (sigma > 0 and math.isfinite(sigma)):
            raise ValueError(f"bandwidth must be a positive finite number, got {self.sigma}")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "c", kernel_constant(m, sigma))
        object.__setattr__(self, "log_c", log_kernel_constant(m, sigma))

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 0 or x.shape[-1] != self.m:
            raise ValueError(
                f"point dimension mismatch: kernel has m={self.m}, got shape {x.shape}"
            )
        return x

    def log(self, x):
        """``log K(x)`` for a point or an ``(n, m)`` array of points."""
        x = self._check(x)
        out = self.log_c - super_radius_exponent(squared_norm(x), self.m, self.sigma)
        return float(out) if out.ndim == 0 else out

    def __call__(self, x):
        x = self._check(x)
        out = self.c * np.exp(-super_radius_exponent(squared_norm(x), self.m, self.sigma))
        return float(out) if out.ndim == 0 else out


def kernel_eval(k: SuperRadiusKernel, x):
    """Evaluate ``k`` at ``x`` (a point or a stack of points)."""
    return k(x)


def kernel_log_eval(k: SuperRadiusKernel, x):
    """Natural log of :func:`kernel_eval`; ``-inf`` once the exponent saturates."""
    return k.log(x)


def tail_radius(m: int, sigma: float, tail_exponent: float = TAIL_EXPONENT) -> float:
    """Radius ``R`` with ``R**(2m) / (2 sigma**2) = tail_exponent``."""
    return math.exp((math.log(2.0 * tail_exponent) + 2.0 * math.log(sigma)) / (2.0 * m))


def normalization_check(m: int, sigma: float, quadrature_points: int = 200) -> float:
    """Integrate the kernel over ``R**m`` by its radial reduction.

    Integrates ``S_m(r) * K(r)`` over ``[0, R]`` where ``S_m(r)`` is the sphere
    surface area, with ``R`` beyond which the integrand is below ``exp(-40)``
    of its scale. ``quadrature_points`` bounds the number of adaptive
    subintervals. The exact answer is 1 for every ``m`` and ``sigma``.
    """
    m = check_dimension(m)
    if not sigma > 0:
        raise ValueError(f"bandwidth must be > 0, got {sigma}")
    if quadrature_points < 100:
        raise ValueError("quadrature_points must be >= 100")
    k = SuperRadiusKernel(m, sigma)
    area = sphere_surface_area(m, 1.0)
    upper = tail_radius(m, sigma)

    def integrand(r):
        return area * r ** (m - 1) * k((r,) + (0.0,) * (m - 1))

    # The bulk of the mass sits below the radius where the exponent is 1/2.
    knee = tail_radius(m, sigma, 0.5)
    value, _ = integrate.quad(
        integrand, 0.0, upper, points=[knee], epsabs=0.0, epsrel=1e-13,
        limit=quadrature_points,
    )
    return value
