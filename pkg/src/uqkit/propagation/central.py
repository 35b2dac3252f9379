"""Min-max search and central-tendency estimation of a model output."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..designs import DesignSpec, generate
from ..distributions import JointDistribution
from ..model import Model
from ..sample import Sample

__all__ = [
    "MinMaxResult",
    "TaylorResult",
    "CentralTendencyResult",
    "minmax_doe",
    "minmax_optimize",
    "taylor_moments",
    "mc_central_tendency",
    "sturges_bins",
]


@dataclass
class MinMaxResult:
    min: float
    argmin: np.ndarray
    max: float
    argmax: np.ndarray
    n_evaluations: int


def _design_points(joint: JointDistribution, design: DesignSpec, rng):
    if design.stratified:
        center = joint.mean() if design.center is None else design.center
        scale = joint.std() if design.scale is None else design.scale
        X = np.asarray(generate(DesignSpec(design.kind, joint.dimension, levels=design.levels,
                                           center=center, scale=scale)))
        # levels far in a bounded tail are pulled back inside the support
        lo = np.array([m.quantile(1e-9) for m in joint.margins])
        hi = np.array([m.quantile(1.0 - 1e-9) for m in joint.margins])
        return np.clip(X, lo, hi)
    u = np.asarray(generate(design, rng))
    return joint.from_uniform(np.clip(u, 1e-12, 1.0 - 1e-12))


def minmax_doe(model: Model, joint: JointDistribution, design: DesignSpec, rng=None, output=0):
    """Extremes of the output over a design.

    Unit-cube designs go through the marginal quantiles.  Stratified
    patterns are centred on the mean with levels in standard deviations
    unless the design gives its own center/scale, then clipped to the
    [1e-9, 1 - 1e-9] quantile box of each margin.
    """
    if design.dimension != joint.dimension:
        raise ValueError("design and joint dimensions differ")
    X = _design_points(joint, design, rng)
    before = model.calls
    Y = np.asarray(model(X))[:, output]
    i, j = int(np.argmin(Y)), int(np.argmax(Y))
    return MinMaxResult(float(Y[i]), X[i].copy(), float(Y[j]), X[j].copy(), model.calls - before)


def minmax_optimize(model: Model, bounds, start, direction="min", output=0, tol=1e-6, max_iter=200):
    """Projected gradient with Armijo backtracking on a box.

    The iteration runs on box-normalised coordinates z = (x - lo)/(hi - lo)
    so that inputs of very different magnitudes share one step length.
    Stops when the projected-gradient norm (normalised scale) is below
    ``tol`` or after ``max_iter`` iterations.  Returns (value, point).
    """
    lo, hi = (np.asarray(b, dtype=float) for b in bounds)
    x0 = np.asarray(start, dtype=float)
    if np.any(x0 < lo) or np.any(x0 > hi):
        raise ValueError("start point outside the bounds")
    if direction not in ("min", "max"):
        raise ValueError("direction is 'min' or 'max'")
    sign = 1.0 if direction == "min" else -1.0
    width = hi - lo

    def f(z):
        return sign * float(model(lo + z * width)[output])

    def grad(z):
        return sign * model.gradient(lo + z * width)[output] * width

    z = (x0 - lo) / width
    fz = f(z)
    t = 1.0
    for _ in range(max_iter):
        g = grad(z)
        if not np.all(np.isfinite(g)):
            # singular derivative on the boundary (e.g. Q^0.6 at Q = 0)
            break
        pg = np.clip(z - g, 0.0, 1.0) - z
        if np.linalg.norm(pg) < tol:
            break
        t = min(2.0 * t, 1e8)
        while True:
            zn = np.clip(z - t * g, 0.0, 1.0)
            fn = f(zn)
            if fn <= fz + 1e-4 * float(g @ (zn - z)) or t < 1e-14:
                break
            t *= 0.5
        if t < 1e-14:
            break
        z, fz = zn, fn
    return sign * fz, lo + z * width


@dataclass
class TaylorResult:
    mean_first_order: float
    mean_second_order: float
    variance: float
    n_evaluations: int

    @property
    def stdev(self):
        return math.sqrt(self.variance)


def taylor_moments(model: Model, joint: JointDistribution, output=0) -> TaylorResult:
    """Perturbation moments at the mean point.

    mean_1 = G(mu); var = grad^T Cov grad;
    mean_2 = mean_1 + 1/2 sum_ij H_ij Cov_ij.  Cov is the covariance of X,
    i.e. rho_ij sigma_i sigma_j with the linear correlation of the inputs.
    """
    mu = joint.mean()
    cov = joint.covariance()
    before = model.calls
    try:
        g0 = float(model(mu)[output])
        grad = model.gradient(mu)[output]
        hess = model.hessian(mu)[output]
    except Exception as exc:
        raise RuntimeError(f"derivatives unavailable at the mean point: {exc}") from exc
    var = float(grad @ cov @ grad)
    m2 = g0 + 0.5 * float(np.sum(hess * cov))
    return TaylorResult(g0, m2, var, model.calls - before)


def sturges_bins(n):
    return int(math.ceil(math.log2(max(int(n), 1)))) + 1


@dataclass
class CentralTendencyResult:
    mean: float
    stdev: float
    histogram_edges: np.ndarray
    histogram_counts: np.ndarray
    output: Sample
    n_evaluations: int

    def histogram_sample(self):
        return Sample(
            np.column_stack([self.histogram_edges[:-1], self.histogram_edges[1:], self.histogram_counts]),
            ["left", "right", "count"],
        )


def mc_central_tendency(model: Model, joint: JointDistribution, n, rng, output=0) -> CentralTendencyResult:
    X = joint.sample(n, rng)
    before = model.calls
    Y = np.asarray(model(np.asarray(X)))[:, output]
    counts, edges = np.histogram(Y, bins=sturges_bins(n))
    return CentralTendencyResult(
        float(Y.mean()),
        float(Y.std(ddof=1)) if Y.size > 1 else 0.0,
        edges,
        counts,
        Sample(Y, [model.output_names[output]]),
        model.calls - before,
    )
