"""Gamma function and the n-ball constants used by the super-radius kernel."""

from __future__ import annotations

import math

#: Largest dimension the library accepts. Beyond this ``r**(2m)`` is dominated
#: by overflow/underflow for any practical radius.
MAX_DIMENSION = 64


def check_dimension(m) -> int:
    """Validate a vector-space dimension and return it as ``int``."""
    if isinstance(m, bool) or int(m) != m:
        raise TypeError(f"dimension must be an integer, got {m!r}")
    m = int(m)
    if m < 1:
        raise ValueError(f"dimension must be >= 1, got {m}")
    if m > MAX_DIMENSION:
        raise ValueError(f"dimension {m} exceeds the supported maximum {MAX_DIMENSION}")
    return m


def gamma(x: float) -> float:
    """Gamma function for positive real arguments.

    Backed by :func:`math.gamma`, which is accurate to a few ulps on the
    range the kernel needs (half-integers up to ``MAX_DIMENSION / 2 + 1``).
    """
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"gamma is only defined here for x > 0, got {x}")
    return math.gamma(x)


def unit_ball_volume(m: int) -> float:
    """Volume of the unit ball in ``m`` dimensions, ``pi**(m/2) / Gamma(m/2 + 1)``.

    This is also the ratio between the density of the super-radius ``||s||**m``
    at zero and the density of ``s`` at the origin.
    """
    m = check_dimension(m)
    return math.pi ** (0.5 * m) / gamma(0.5 * m + 1.0)


def sphere_surface_area(m: int, r: float) -> float:
    """Surface area of the sphere of radius ``r`` in ``m`` dimensions."""
    m = check_dimension(m)
    if r < 0:
        raise ValueError(f"radius must be >= 0, got {r}")
    return 2.0 * math.pi ** (0.5 * m) * r ** (m - 1) / gamma(0.5 * m)


def log_kernel_constant(m: int, sigma: float) -> float:
    """Natural log of :func:`kernel_constant`."""
    m = check_dimension(m)
    if not sigma > 0:
        raise ValueError(f"bandwidth must be > 0, got {sigma}")
    return (
        0.5 * math.log(2.0)
        + math.lgamma(0.5 * m + 1.0)
        - 0.5 * (m + 1) * math.log(math.pi)
        - math.log(sigma)
    )


def kernel_constant(m: int, sigma: float) -> float:
    """Peak value of the super-radius kernel, ``sqrt(2) Gamma(m/2+1) / (pi**((m+1)/2) sigma)``."""
    m = check_dimension(m)
    if not sigma > 0:
        raise ValueError(f"bandwidth must be > 0, got {sigma}")
    return math.sqrt(2.0) * gamma(0.5 * m + 1.0) / (math.pi ** (0.5 * (m + 1)) * sigma)
