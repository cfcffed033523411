"""Super-radius kernel density estimation.

The kernel ``exp(-||x||**(2m) / (2 sigma**2))`` (suitably normalized) turns an
m-dimensional density estimate into a one-dimensional one in the
"super-radius" ``||x||**m``, giving a pointwise MSE rate of ``n**(-2/3)``
independent of ``m``.
"""

from .classifier import ClassifierModel, Likelihoods, likelihoods, predict, train
from .estimator import (
    FixedEstimator,
    SRKDEModel,
    approximate_function,
    build_srkde,
    estimate_fixed,
    estimate_fz0,
    estimate_srkde,
    log_estimate_srkde,
    super_radius_transform,
)
from .experiment import ConvergenceConfig, ConvergenceResult, emit_result, fit_slope, run_convergence
from .kernel import SuperRadiusKernel, kernel_eval, kernel_log_eval, normalization_check
from .neighbors import KdTreeIndex, build_index
from .special import gamma, kernel_constant, sphere_surface_area, unit_ball_volume
from .synthetic import GaussianMixture, mixture_density, reference_mixture, sample_mixture

__version__ = "0.1.0"

__all__ = [
    "ClassifierModel", "ConvergenceConfig", "ConvergenceResult", "FixedEstimator",
    "GaussianMixture", "KdTreeIndex", "Likelihoods", "SRKDEModel", "SuperRadiusKernel",
    "approximate_function", "build_index", "build_srkde", "emit_result", "estimate_fixed",
    "estimate_fz0", "estimate_srkde", "fit_slope", "gamma", "kernel_constant", "kernel_eval",
    "kernel_log_eval", "likelihoods", "log_estimate_srkde", "mixture_density",
    "normalization_check", "reference_mixture", "predict", "run_convergence", "sample_mixture",
    "sphere_surface_area", "super_radius_transform", "train", "unit_ball_volume",
]
