import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm, special_ortho_group

from srkde.kernel import SuperRadiusKernel, kernel_eval, kernel_log_eval, normalization_check


def test_standard_normal_values():
    k = SuperRadiusKernel(1, 1.0)
    assert kernel_eval(k, [0.0]) == pytest.approx(0.3989422804014327, rel=1e-14)
    assert kernel_eval(k, [1.0]) == pytest.approx(0.24197072451914337, rel=1e-14)


def test_four_dim_value_against_closed_form():
    # mpmath: 1.61685216220986... * exp(-0.5**8 / 0.02)
    k = SuperRadiusKernel(4, 0.1)
    assert kernel_eval(k, [0.5, 0, 0, 0]) == pytest.approx(1.32998631034959915, rel=1e-13)


def test_cached_constant():
    k = SuperRadiusKernel(4, 0.1)
    x = np.zeros(4)
    assert k(x) == k.c
    assert kernel_log_eval(k, x) == k.log_c


def test_m1_is_gaussian():
    for s in (0.005, 0.3, 1.0, 7.0):
        k = SuperRadiusKernel(1, s)
        x = np.linspace(-5 * s, 5 * s, 1001)
        assert np.max(np.abs(k(x[:, None]) - norm.pdf(x, scale=s))) < 1e-12


def test_radial_symmetry(rng):
    k = SuperRadiusKernel(3, 0.5)
    for _ in range(50):
        x = rng.normal(size=3) * 0.6
        q = special_ortho_group.rvs(3, random_state=rng)
        assert k(q @ x) == pytest.approx(k(x), rel=1e-12)


def test_equal_norms_equal_values():
    k = SuperRadiusKernel(3, 0.5)
    assert k([0.6, 0.0, 0.8]) == pytest.approx(k([0.0, 1.0, 0.0]), rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(
    m=st.integers(1, 12),
    sigma=st.floats(1e-3, 1e2),
    x=st.lists(st.floats(-3, 3), min_size=12, max_size=12),
)
def test_log_eval_consistent_and_bounded(m, sigma, x):
    k = SuperRadiusKernel(m, sigma)
    p = np.array(x[:m])
    val = k(p)
    assert 0.0 <= val <= k.c
    if val > 1e-300:
        assert math.exp(k.log(p)) == pytest.approx(val, rel=1e-12)


def test_vectorized_matches_pointwise(rng):
    k = SuperRadiusKernel(4, 0.2)
    pts = rng.normal(size=(30, 4)) * 0.7
    batch = k(pts)
    assert batch.shape == (30,)
    assert np.array_equal(batch, [k(p) for p in pts])


def test_no_overflow_far_away():
    k = SuperRadiusKernel(8, 0.01)
    x = np.array([100.0] + [0.0] * 7)
    assert kernel_eval(k, x) == 0.0
    lv = kernel_log_eval(k, x)
    assert not math.isnan(lv)
    assert lv < -1e35


def test_log_saturates_to_minus_inf():
    k = SuperRadiusKernel(8, 0.01)
    x = np.array([1e30] + [0.0] * 7)
    assert kernel_log_eval(k, x) == -math.inf
    assert kernel_eval(k, x) == 0.0


def test_dimension_mismatch():
    k = SuperRadiusKernel(3, 1.0)
    with pytest.raises(ValueError, match="dimension"):
        k([1.0, 2.0])


@pytest.mark.parametrize("sigma", [0.0, -2.0, float("nan")])
def test_bad_bandwidth(sigma):
    with pytest.raises(ValueError):
        SuperRadiusKernel(2, sigma)


@pytest.mark.parametrize("m", [1, 2, 3, 4, 8])
@pytest.mark.parametrize("sigma", [0.005, 0.1, 1.0, 10.0])
def test_normalization(m, sigma):
    assert normalization_check(m, sigma) == pytest.approx(1.0, abs=1e-9)


def test_normalization_in_cartesian_coordinates():
    # Independent of the radial reduction: direct 2-D quadrature.
    from scipy import integrate
    k = SuperRadiusKernel(2, 0.37)
    val, _ = integrate.dblquad(lambda y, x: k([x, y]), -1.5, 1.5, -1.5, 1.5, epsabs=1e-12)
    assert val == pytest.approx(1.0, abs=1e-8)


def test_normalization_args():
    with pytest.raises(ValueError):
        normalization_check(2, 0.0)
    with pytest.raises(ValueError):
        normalization_check(2, 1.0, quadrature_points=50)
