import math

import numpy as np
import pytest
from scipy import integrate, stats

from srkde.dataio import validate_csv
from srkde.synthetic import (
    GaussianMixture,
    export_csv,
    make_rng,
    mixture_density,
    reference_mixture,
    sample_mixture,
    standard_normal_mixture,
    stream_seed,
)


def test_standard_normal_density():
    assert mixture_density(standard_normal_mixture(1), [0.0]) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-15)


def test_reference_density_at_origin():
    # mpmath: (1/(4 pi^2)) * exp(-0.005)
    assert mixture_density(reference_mixture(), np.zeros(4)) == pytest.approx(0.025203960532674888844, rel=1e-14)
    assert mixture_density(reference_mixture(), np.zeros(4)) == pytest.approx(math.exp(-0.005) / (4 * math.pi ** 2), rel=1e-14)


def test_reference_mixture_layout():
    g = reference_mixture()
    assert g.m == 4
    assert g.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert g.means.tolist() == [[0.1, 0, 0, 0], [-0.1, 0, 0, 0]]
    lit = reference_mixture(literal_weights=True)
    assert lit.weights.sum() == pytest.approx(11 / 20 + 9 / 21, rel=1e-15)
    assert lit.weights.sum() == pytest.approx(0.97857, abs=1e-5)
    with pytest.raises(ValueError):
        sample_mixture(lit, 10, 0)


def test_symmetric_mixture_is_even(rng):
    g = GaussianMixture([0.5, 0.5], [[0.7, -0.2], [-0.7, 0.2]])
    for x in rng.normal(size=(20, 2)):
        assert mixture_density(g, x) == pytest.approx(mixture_density(g, -x), rel=1e-14)


def test_density_bounds(rng):
    g = reference_mixture()
    vals = mixture_density(g, rng.normal(size=(1000, 4)) * 3)
    assert np.all(vals > 0)
    assert np.all(vals <= (2 * math.pi) ** -2)


def test_density_integrates_to_one_1d_2d():
    g1 = GaussianMixture([0.3, 0.7], [[-1.0], [2.0]])
    val, _ = integrate.quad(lambda x: mixture_density(g1, [x]), -np.inf, np.inf, epsabs=1e-12)
    assert val == pytest.approx(1.0, abs=1e-8)
    g2 = GaussianMixture([0.4, 0.6], [[0.5, 0.0], [-0.5, 1.0]])
    val, _ = integrate.dblquad(lambda y, x: mixture_density(g2, [x, y]), -10, 10, -10, 11, epsabs=1e-11)
    assert val == pytest.approx(1.0, abs=1e-8)


def test_density_integrates_to_one_4d(rng):
    g = reference_mixture()
    # Importance sampling from N(0, 2^2 I).
    x = rng.normal(scale=2.0, size=(200_000, 4))
    q = stats.multivariate_normal(np.zeros(4), 4.0 * np.eye(4)).pdf(x)
    assert np.mean(mixture_density(g, x) / q) == pytest.approx(1.0, rel=0.005)


def test_sample_moments():
    n = 100_000
    x = sample_mixture(standard_normal_mixture(1), n, 11)[:, 0]
    assert abs(x.mean()) < 4 / math.sqrt(n)
    assert abs(x.var() - 1.0) < 4 * math.sqrt(2 / n)


def test_sample_deterministic():
    g = reference_mixture()
    a = sample_mixture(g, 500, 7)
    b = sample_mixture(g, 500, 7)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_mixture(g, 500, 8))


def test_degenerate_weights():
    g = GaussianMixture([1.0, 0.0], [[50.0], [-50.0]])
    assert np.all(sample_mixture(g, 1000, 3) > 40)


def test_marginal_ks():
    g = reference_mixture()
    x = sample_mixture(g, 100_000, 2024)[:, 0]

    def cdf(t):
        return 0.55 * stats.norm.cdf(t - 0.1) + 0.45 * stats.norm.cdf(t + 0.1)

    res = stats.kstest(x, cdf)
    assert res.pvalue > 0.01


def test_stream_seeds_distinct():
    seeds = {stream_seed(0, r, n) for r in range(50) for n in (10, 20)}
    assert len(seeds) == 100
    assert stream_seed(5, 1, 2) == stream_seed(5, 1, 2)
    a = make_rng(stream_seed(5, 1, 2)).random(3)
    assert np.array_equal(a, make_rng(stream_seed(5, 1, 2)).random(3))


def test_validation():
    with pytest.raises(ValueError):
        GaussianMixture([0.5, 0.4], [[0.0], [1.0]])
    with pytest.raises(ValueError):
        GaussianMixture([1.0], [[0.0], [1.0]])
    with pytest.raises(ValueError):
        mixture_density(reference_mixture(), [0.0, 0.0])
    g = GaussianMixture.normalized([2, 6], [[0.0], [1.0]])
    assert g.weights.tolist() == [0.25, 0.75]


def test_csv_roundtrip(tmp_path):
    pts = sample_mixture(reference_mixture(), 50, 1)
    path = export_csv(pts, tmp_path / "d.csv")
    assert path.read_text().splitlines()[0] == "x1,x2,x3,x4"
    back = validate_csv(path)
    assert back.m == 4 and back.n == 50
    assert np.array_equal(back.points, pts)
