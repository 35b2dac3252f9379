"""Laws whose parameters are themselves random.

``ConditionalRandomVector`` only samples.  ``ConditionalDistribution`` adds
the mixed density ``f(x) = int f_{X|theta=g(y)}(x) f_Y(y) dy`` computed by
adaptive quadrature over the law of Y.
"""
from __future__ import annotations

import math

import numpy as np

from ..quadrature import gk_adaptive
from .multivariate import JointDistribution
from .univariate import DistributionError, UnivariateDistribution, _bisect

__all__ = ["ConditionalRandomVector", "ConditionalDistribution"]


def _as_joint(law):
    if isinstance(law, JointDistribution):
        return law
    if isinstance(law, UnivariateDistribution):
        return JointDistribution([law])
    return JointDistribution(list(law))


class ConditionalRandomVector:
    """X | Theta ~ family(*Theta) with Theta ~ law, or Theta = g(Y), Y ~ law.

    ``family`` is a distribution class (or any callable taking the parameter
    columns as positional arrays) that accepts array-valued parameters.
    """

    def __init__(self, family, law, g=None):
        self.family = family
        self.law = _as_joint(law)
        self.g = g

    def parameters(self, y):
        y = np.asarray(y, dtype=float)
        theta = y if self.g is None else np.asarray(self.g(y), dtype=float)
        return theta.reshape(y.shape[0], -1)

    def build(self, theta):
        theta = np.asarray(theta, dtype=float)
        try:
            return self.family(*theta.T)
        except DistributionError as exc:
            raise DistributionError(f"invalid parameter draw: {exc}") from exc

    def sample(self, n, rng):
        y = np.asarray(self.law.sample(n, rng))
        dist = self.build(self.parameters(y))
        return np.asarray(dist.quantile(rng.random(int(n))), dtype=float)


class ConditionalDistribution(ConditionalRandomVector, UnivariateDistribution):
    """Marginal law of X in the conditional construction, with a density.

    Integrals over Y are taken on its quantile scale, u in (0, 1)^k with
    y = F_Y^{-1}(u), so the weight is uniform.  For k = 1 the rule is the
    vectorised adaptive Gauss-Kronrod of :mod:`uqkit.quadrature`; for k > 1 a
    fixed tensor Gauss-Legendre rule with ``nodes`` points per axis.
    """

    def __init__(self, family, law, g=None, tol=1e-8, nodes=64):
        super().__init__(family, law, g)
        self.tol = tol
        self.nodes = nodes
        self._support = None

    def _laws_at(self, u):
        return self.build(self.parameters(self.law.from_uniform(u)))

    def _integrate(self, fn):
        """E_Y[fn(law of X given Y)] where fn maps a vectorised law to an array."""
        k = self.law.dimension
        if k == 1:
            val, _ = gk_adaptive(lambda u: fn(self._laws_at(u[:, None])), 0.0, 1.0, tol=self.tol)
            return float(val)
        t, w = np.polynomial.legendre.leggauss(self.nodes)
        t, w = 0.5 * (t + 1.0), 0.5 * w
        grids = np.meshgrid(*([t] * k), indexing="ij")
        U = np.column_stack([g.ravel() for g in grids])
        W = np.prod(np.meshgrid(*([w] * k), indexing="ij"), axis=0).ravel()
        return float(np.sum(W * fn(self._laws_at(U))))

    @property
    def support(self):
        if self._support is None:
            k = self.law.dimension
            t = np.concatenate([[1e-15], (np.arange(256) + 0.5) / 256, [1 - 1e-15]])
            U = np.column_stack([g.ravel() for g in np.meshgrid(*([t if k == 1 else t[::8]] * k), indexing="ij")])
            lo, hi = self._laws_at(U).support
            self._support = (float(np.min(lo)), float(np.max(hi)))
        return self._support

    def pdf(self, x):
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.array([self._integrate(lambda d, v=v: np.broadcast_to(d.pdf(v), np.shape(d.parameters[0]))) for v in xs])
        return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))

    def cdf(self, x):
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.array([self._integrate(lambda d, v=v: np.broadcast_to(d.cdf(v), np.shape(d.parameters[0]))) for v in xs])
        out = np.clip(out, 0.0, 1.0)
        return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        lo, hi = self.support
        if not math.isfinite(lo) or not math.isfinite(hi):
            m, s = self.mean(), math.sqrt(self.variance())
            lo = lo if math.isfinite(lo) else m - 40 * s
            hi = hi if math.isfinite(hi) else m + 40 * s
        q = _bisect(lambda v: np.array([self.cdf(t) for t in np.ravel(v)]).reshape(np.shape(v)), p, lo, hi, iterations=60, rtol=1e-10)
        return float(q) if p.ndim == 0 else q

    def mean(self):
        return self._integrate(lambda d: np.asarray(d.mean()))

    def variance(self):
        second = self._integrate(lambda d: np.asarray(d.variance()) + np.asarray(d.mean()) ** 2)
        return second - self.mean() ** 2
