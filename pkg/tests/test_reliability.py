import math

import numpy as np
import pytest
from scipy import special, stats

from uqkit.distributions import JointDistribution, Normal, Uniform
from uqkit.flood import THRESHOLD, flood_joint, flood_level
from uqkit.model import Model
from uqkit.propagation import (
    ConvergenceError,
    Event,
    directional_sampling_pf,
    form,
    importance_sampling_pf,
    mc_pf,
    subset_sampling_pf,
)


def _affine_event(beta0, alpha):
    """Failure when beta0 - alpha.u < 0 on independent standard normals."""
    d = len(alpha)
    names = [f"u{i}" for i in range(d)]
    formula = f"{float(beta0)!r}" + "".join(f" - ({float(a)!r})*{n}" for a, n in zip(alpha, names))
    return Event(Model.from_expressions(names, [formula]), 0.0, "<"), JointDistribution([Normal()] * d, names=names)


@pytest.fixture(scope="module")
def flood_event():
    return Event(flood_level(), THRESHOLD, ">")


@pytest.fixture(scope="module")
def flood_mc(flood_event):
    return mc_pf(flood_event, flood_joint(), 10**5, np.random.default_rng(42))


@pytest.fixture(scope="module")
def flood_form(flood_event):
    return form(flood_event, flood_joint())


# ---------------------------------------------------------------- FORM


@pytest.mark.parametrize("beta0,alpha", [(3.0, [0.6, 0.8]), (2.2, [1.0]), (4.0, [0.5, -0.5, 0.5, 0.5])])
def test_form_exact_on_affine(beta0, alpha):
    event, joint = _affine_event(beta0, alpha)
    res = form(event, joint)
    assert abs(res.beta - beta0) < 1e-8
    assert res.pf == pytest.approx(special.ndtr(-beta0), rel=1e-7)
    np.testing.assert_allclose(res.importance_factors, np.square(alpha), atol=1e-8)


def test_form_importance_invariant_to_scaling():
    a, joint = _affine_event(3.0, [0.6, 0.8])
    names = joint.names
    scaled = Event(Model.from_expressions(names, ["7*(u0^3/10 + 3 - 0.6*u0 - 0.8*u1)"]), 0.0, "<")
    plain = Event(Model.from_expressions(names, ["u0^3/10 + 3 - 0.6*u0 - 0.8*u1"]), 0.0, "<")
    r1, r2 = form(scaled, joint), form(plain, joint)
    np.testing.assert_allclose(r1.importance_factors, r2.importance_factors, atol=1e-7)
    assert r1.beta == pytest.approx(r2.beta, abs=1e-7)


def test_form_negative_beta_when_origin_fails():
    event, joint = _affine_event(-1.5, [1.0, 0.0])
    res = form(event, joint)
    assert res.beta == pytest.approx(-1.5, abs=1e-8)
    assert res.pf == pytest.approx(special.ndtr(1.5), rel=1e-7)


def test_form_zero_gradient():
    joint = JointDistribution([Normal(), Normal()], names=["a", "b"])
    event = Event(Model.from_expressions(["a", "b"], ["a^2 + b^2 + 1"]), 0.5, "<")
    with pytest.raises(ConvergenceError):
        form(event, joint)


def test_form_flood(flood_form):
    assert flood_form.beta == pytest.approx(3.04, abs=0.05)
    assert 1.0e-3 <= flood_form.pf <= 1.4e-3
    assert flood_form.importance_factors.sum() == pytest.approx(1.0, abs=1e-10)
    assert flood_form.iterations <= 100
    assert set(flood_form.importance()) == {"Q", "Ks", "Zv", "Zm"}


def test_form_flood_design_point_on_limit_state(flood_form):
    level = flood_level()
    assert level(flood_form.design_point_x)[0] == pytest.approx(THRESHOLD, abs=1e-5)


def test_form_flood_importance_ranking(flood_form):
    # documented ranking: Q and Zv are the two dominant factors
    top = sorted(flood_form.importance(), key=flood_form.importance().get, reverse=True)[:2]
    assert set(top) == {"Q", "Zv"}


def test_form_flood_ranking_by_conditional_variance(flood_form):
    # oracle: first-order indices of the failure indicator estimated by binning, on the U scale
    joint = flood_joint()
    event = Event(flood_level(), THRESHOLD)
    u = np.random.default_rng(3).standard_normal((4 * 10**5, 4))
    from uqkit.transforms import make_transform

    x = make_transform(joint).from_standard(u)
    y = flood_level()(x)[:, 0]
    fail = event.occurs(y).astype(float)
    score = []
    for j in range(4):
        bins = np.quantile(u[:, j], np.linspace(0, 1, 51))
        idx = np.clip(np.searchsorted(bins, u[:, j]) - 1, 0, 49)
        means = np.bincount(idx, weights=fail, minlength=50) / np.bincount(idx, minlength=50)
        score.append(means.var())
    assert np.argsort(score)[::-1].tolist() == np.argsort(flood_form.importance_factors)[::-1].tolist()


# ---------------------------------------------------------------- Monte Carlo


def test_mc_impossible_event():
    m = Model.from_expressions(["x"], ["x"])
    res = mc_pf(Event(m, 2.0), JointDistribution([Uniform(0, 1)]), 5000, np.random.default_rng(0))
    assert res.pf == 0.0 and res.variance == 0.0


def test_mc_bernoulli():
    m = Model.from_expressions(["x"], ["x"])
    n = 20000
    res = mc_pf(Event(m, 0.9), JointDistribution([Uniform(0, 1)]), n, np.random.default_rng(1))
    assert abs(res.pf - 0.1) < 4 * math.sqrt(0.09 / n)
    assert res.n_evaluations == n


def test_mc_unbiased_over_seeds():
    m = Model.from_expressions(["x"], ["x"])
    joint = JointDistribution([Normal()])
    p = stats.norm.sf(2.0)
    n = 5000
    est = [mc_pf(Event(m, 2.0), joint, n, np.random.default_rng(s)).pf for s in range(200)]
    assert abs(np.mean(est) - p) < 4 * math.sqrt(p * (1 - p) / (200 * n))


def test_mc_cv_target_stops_early():
    m = Model.from_expressions(["x"], ["x"])
    res = mc_pf(Event(m, 0.5), JointDistribution([Uniform(0, 1)]), 10**6, np.random.default_rng(2), cv_target=0.05)
    assert res.n_evaluations < 10**4
    assert res.cv <= 0.05


def test_mc_flood(flood_mc):
    assert flood_mc.pf == pytest.approx(1.5e-3, abs=0.3e-3)
    lo, hi = flood_mc.ci95
    assert lo < 1.5e-3 < hi
    assert hi - lo == pytest.approx(2 * stats.norm.ppf(0.975) * math.sqrt(flood_mc.pf * (1 - flood_mc.pf) / 10**5), rel=1e-9)


def test_history_halfwidth_slope(flood_mc, tmp_path):
    n = np.array([h[0] for h in flood_mc.history], dtype=float)
    hw = np.array([h[2] for h in flood_mc.history])
    keep = n >= 2 * 10**4
    slope = np.polyfit(np.log(n[keep]), np.log(hw[keep]), 1)[0]
    assert abs(slope + 0.5) <= 0.1
    flood_mc.history_csv(tmp_path / "h.csv")
    lines = (tmp_path / "h.csv").read_text().splitlines()
    assert lines[0] == "n,estimate,ci_low,ci_high" and len(lines) == 1 + len(flood_mc.history)


# ---------------------------------------------------------------- importance sampling


def test_is_at_origin_is_crude_mc_in_u():
    event, joint = _affine_event(2.0, [1.0, 0.0])
    a = importance_sampling_pf(event, joint, [0.0, 0.0], 10**4, np.random.default_rng(5))
    u = np.random.default_rng(5).standard_normal((10**4, 2))
    assert a.pf == np.mean(u[:, 0] > 2.0)


def test_is_affine_target():
    alpha = np.array([0.6, 0.8])
    event, joint = _affine_event(3.04, alpha)
    res = importance_sampling_pf(event, joint, 3.04 * alpha, 10**4, np.random.default_rng(6))
    assert abs(res.pf - special.ndtr(-3.04)) < 3 * res.std


def test_is_dimension_mismatch(flood_event):
    with pytest.raises(ValueError):
        importance_sampling_pf(flood_event, flood_joint(), [1.0, 2.0], 100, np.random.default_rng(0))


def test_is_flood(flood_event, flood_form, flood_mc):
    res = importance_sampling_pf(flood_event, flood_joint(), flood_form.design_point_u, 10**4, np.random.default_rng(7))
    assert res.pf == pytest.approx(1.4e-3, abs=0.15e-3)
    lo, hi = res.ci95
    assert lo <= 1.53e-3 and hi >= 1.26e-3
    mc_equal_n = 1.96 * math.sqrt(res.pf * (1 - res.pf) / 10**4)
    assert 1.96 * res.std < mc_equal_n


# ---------------------------------------------------------------- directional sampling


def test_directional_radial_domain_zero_variance():
    names = ["a", "b", "c"]
    event = Event(Model.from_expressions(names, ["a^2 + b^2 + c^2"]), 9.0)
    res = directional_sampling_pf(event, JointDistribution([Normal()] * 3, names=names), 200, np.random.default_rng(8))
    assert res.pf == pytest.approx(stats.chi2.sf(9.0, 3), rel=1e-5)
    assert res.variance < 1e-14


def test_directional_half_space():
    event, joint = _affine_event(2.0, [0.6, 0.8])
    res = directional_sampling_pf(event, joint, 2000, np.random.default_rng(9))
    assert abs(res.pf - 0.02275) < 3 * res.std


def test_directional_flood(flood_event, flood_mc):
    res = directional_sampling_pf(flood_event, flood_joint(), 2000, np.random.default_rng(10))
    lo, hi = flood_mc.ci95
    assert lo <= res.pf <= hi
    assert res.diagnostics["unresolved_roots"] == 0


def test_directional_flood_cost(flood_event):
    # documented: <= 20% of crude-MC evaluations for an equal CI half-width
    res = directional_sampling_pf(flood_event, flood_joint(), 2000, np.random.default_rng(11))
    n_mc_equal = res.pf * (1 - res.pf) / res.variance
    assert res.n_evaluations <= 0.2 * n_mc_equal


# ---------------------------------------------------------------- subset sampling


def test_subset_frequent_event_single_step():
    event, joint = _affine_event(0.0, [1.0, 0.0])
    res = subset_sampling_pf(event, joint, 1000, np.random.default_rng(12), p0=0.1)
    assert len(res.diagnostics["steps"]) == 1
    assert res.n_evaluations == 1000
    u = np.random.default_rng(12).standard_normal((1000, 2))
    assert res.pf == np.mean(u[:, 0] > 0)


def test_subset_rare_affine():
    event, joint = _affine_event(4.0, [0.6, 0.8])
    target = special.ndtr(-4.0)
    est = [subset_sampling_pf(event, joint, 5000, np.random.default_rng(100 + s)).pf for s in range(20)]
    ratio = np.median(est) / target
    assert 1 / 1.5 <= ratio <= 1.5


def test_subset_flood(flood_event, flood_mc):
    res = subset_sampling_pf(flood_event, flood_joint(), 8000, np.random.default_rng(13))
    lo, hi = flood_mc.ci95
    assert lo <= res.pf <= hi
    assert res.n_evaluations <= 3 * 10**4


def test_subset_bad_p0(flood_event):
    with pytest.raises(ValueError):
        subset_sampling_pf(flood_event, flood_joint(), 1000, np.random.default_rng(0), p0=1.5)


def test_all_estimators_agree(flood_event, flood_form, flood_mc):
    joint = flood_joint()
    results = [
        flood_mc,
        importance_sampling_pf(flood_event, joint, flood_form.design_point_u, 10**4, np.random.default_rng(20)),
        directional_sampling_pf(flood_event, joint, 2000, np.random.default_rng(21)),
        subset_sampling_pf(flood_event, joint, 8000, np.random.default_rng(22)),
    ]
    lo = max(r.ci95[0] for r in results)
    hi = min(r.ci95[1] for r in results)
    assert lo <= hi
