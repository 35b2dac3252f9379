import math

import numpy as np
import pytest

from uqkit.designs import DesignSpec
from uqkit.distributions import JointDistribution, Normal, NormalCopula, Uniform
from uqkit.model import Model
from uqkit.propagation import mc_central_tendency, minmax_doe, minmax_optimize, sturges_bins, taylor_moments


# ---------------------------------------------------------------- min-max


def test_monotone_model_grid_extremes():
    joint = JointDistribution([Uniform(0, 1)])
    m = Model.from_expressions(["x"], ["exp(x)"])
    res = minmax_doe(m, joint, DesignSpec("axial", 1, levels=[0.5, 1.0]), output=0)
    # axial pattern around the mean 0.5 with sd 0.2887: endpoints are the extreme levels
    assert res.argmin[0] == pytest.approx(0.5 - 1.0 / math.sqrt(12))
    assert res.argmax[0] == pytest.approx(0.5 + 1.0 / math.sqrt(12))
    assert res.max == pytest.approx(math.exp(res.argmax[0]))
    assert res.n_evaluations == 5


def test_constant_model():
    joint = JointDistribution([Normal(), Normal()])
    m = Model.from_function(lambda X: np.full(len(X), 3.0), 2, vectorized=True)
    res = minmax_doe(m, joint, DesignSpec("halton", 2, n=100))
    assert res.min == res.max == 3.0


def test_composite_design_stays_in_support(joint, height):
    res = minmax_doe(height, joint, DesignSpec("composite", 4, levels=[1.0, 2.0]))
    assert res.n_evaluations == 1 + 2 * 8 + 2 * 16
    assert np.all(np.isfinite([res.min, res.max]))


def test_flood_lhs_max_located_at_low_ks(joint, height):
    for seed in range(5):
        res = minmax_doe(height, joint, DesignSpec("lhs", 4, n=10**4), np.random.default_rng(seed))
        u = joint.to_uniform(res.argmax[None, :])[0]
        # H blows up as Ks -> 0, so the maximiser is among the lowest Ks strata
        assert u[1] < 1e-3
        assert res.max > 3.5


def test_flood_lhs_max_claim(joint, height):
    # documented example: max H in [3.5, 12] m, at Q and Ks both in their outer 10% tails
    res = minmax_doe(height, joint, DesignSpec("lhs", 4, n=10**4), np.random.default_rng(0))
    u = joint.to_uniform(res.argmax[None, :])[0]
    assert 3.5 <= res.max <= 12
    assert u[0] > 0.9 and u[1] < 0.1


def test_optimize_quadratic_interior():
    m = Model.from_expressions(["x", "y"], ["(x-0.3)^2 + 2*(y+1.2)^2"])
    value, x = minmax_optimize(m, ([-2, -2], [2, 2]), [1.5, 1.5])
    np.testing.assert_allclose(x, [0.3, -1.2], atol=1e-5)
    assert value == pytest.approx(0.0, abs=1e-9)


def test_optimize_linear_hits_vertex():
    m = Model.from_expressions(["x", "y"], ["2*x - 3*y"])
    value, x = minmax_optimize(m, ([0, 0], [1, 4]), [0.5, 0.5], direction="max")
    np.testing.assert_allclose(x, [1, 0])
    assert value == 2.0
    value, x = minmax_optimize(m, ([0, 0], [1, 4]), [0.5, 0.5])
    np.testing.assert_allclose(x, [0, 4])


def test_optimize_start_outside():
    m = Model.from_expressions(["x"], ["x"])
    with pytest.raises(ValueError):
        minmax_optimize(m, ([0], [1]), [2.0])


def _flood_box(joint):
    mu, sd = joint.mean(), joint.std()
    lo = np.maximum(mu - 3 * sd, [m.support[0] for m in joint.margins])
    hi = np.minimum(mu + 3 * sd, [m.support[1] for m in joint.margins])
    return lo, hi


@pytest.mark.parametrize("direction", ["min", "max"])
def test_flood_optimize_vs_random_search(joint, height, direction):
    lo, hi = _flood_box(joint)
    value, x = minmax_optimize(height, (lo, hi), joint.mean(), direction=direction)
    X = lo + np.random.default_rng(0).random((10**5, 4)) * (hi - lo)
    y = height(X)[:, 0]
    if direction == "min":
        assert value <= y.min() + 1e-3
    else:
        assert value >= y.max() - 1e-3
    assert np.all(x >= lo) and np.all(x <= hi)
    assert value == pytest.approx(height(x)[0], rel=1e-12)


# ---------------------------------------------------------------- Taylor


def test_taylor_affine_independent():
    m = Model.from_expressions(["a", "b"], ["a + b"])
    res = taylor_moments(m, JointDistribution([Normal(), Normal()]))
    assert res.stdev == pytest.approx(math.sqrt(2), rel=1e-12)
    assert res.mean_first_order == res.mean_second_order == 0.0


def test_taylor_perfectly_correlated():
    m = Model.from_expressions(["a", "b"], ["a + b"])
    joint = JointDistribution([Normal(), Normal()], NormalCopula([[1, 0.999999999999], [0.999999999999, 1]]))
    assert taylor_moments(m, joint).stdev == pytest.approx(2.0, rel=1e-6)


def test_taylor_second_order_mean():
    m = Model.from_expressions(["a", "b"], ["a^2 + 3*a*b"])
    joint = JointDistribution([Normal(1, 2), Normal(-1, 1)], NormalCopula([[1, 0.5], [0.5, 1]]))
    res = taylor_moments(m, joint)
    # exact for a quadratic: E[a^2] + 3 E[ab] = 1 + 4 + 3 (-1 + 0.5*2*1)
    assert res.mean_second_order == pytest.approx(5.0, rel=1e-10)
    assert res.mean_first_order == pytest.approx(1 - 3)


def test_taylor_flood_level(joint, level):
    res = taylor_moments(level, joint)
    assert res.mean_first_order == pytest.approx(52.718, abs=2e-3)
    # oracle: analytic gradient of Zv + H at the mean, covariance from 2e6 draws
    mu = joint.mean()
    q, ks, zv, zm = mu
    h = (q / (ks * 300 * math.sqrt((zm - zv) / 5000))) ** 0.6
    g = np.array([0.6 * h / q, -0.6 * h / ks, 1 + 0.3 * h / (zm - zv), -0.3 * h / (zm - zv)])
    cov = np.cov(np.asarray(joint.sample(2 * 10**6, np.random.default_rng(1))).T)
    assert res.stdev == pytest.approx(math.sqrt(g @ cov @ g), rel=5e-3)
    assert res.n_evaluations >= 1


def test_taylor_flood_documented_stdev(joint, level):
    # documented figure 1.15 m; Eq. 4 on these inputs gives 1.369 m
    assert taylor_moments(level, joint).stdev == pytest.approx(1.15, abs=0.05)


# ---------------------------------------------------------------- Monte Carlo


def test_mc_constant_model():
    m = Model.from_function(lambda X: np.full(len(X), 2.0), 1, vectorized=True)
    res = mc_central_tendency(m, JointDistribution([Normal()]), 100, np.random.default_rng(0))
    assert res.stdev == 0.0 and res.mean == 2.0


def test_mc_affine_gaussian_unbiased():
    m = Model.from_expressions(["a", "b"], ["1 + 2*a - b"])
    joint = JointDistribution([Normal(1, 1), Normal(0, 2)])
    n = 1000
    means = [mc_central_tendency(m, joint, n, np.random.default_rng(s)).mean for s in range(100)]
    sigma = math.sqrt(4 + 4)
    assert abs(np.mean(means) - 3.0) < 4 * sigma / math.sqrt(100 * n)


def test_mc_flood_level(joint, level):
    res = mc_central_tendency(level, joint, 10**4, np.random.default_rng(42))
    assert res.mean == pytest.approx(52.75, abs=0.1)
    assert res.stdev == pytest.approx(1.42, abs=0.07)
    assert res.n_evaluations == 10**4
    assert len(res.histogram_counts) == sturges_bins(10**4) == 15
    assert res.histogram_counts.sum() == 10**4
    hs = res.histogram_sample()
    assert hs.labels == ["left", "right", "count"]
