"""Copulas and joint laws built by Sklar composition.

A copula here knows how to move between its uniform scale and a vector of
independent standard normals (``to_independent_normal`` and back).  That
single pair of maps is what sampling, the Nataf and Rosenblatt transforms
and the normal-copula density all need.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate, linalg, special

from ..kernels import radical_inverse
from ..sample import Sample, as_array
from .univariate import DistributionError, make_distribution

__all__ = [
    "Copula",
    "IndependentCopula",
    "NormalCopula",
    "ComposedCopula",
    "JointDistribution",
    "compose",
    "extract_copula",
    "make_copula",
    "bivariate_normal_cdf",
    "U_CLIP",
]

U_CLIP = 1e-15
_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73)


def _normal_scores(u):
    return special.ndtri(np.clip(u, U_CLIP, 1.0 - U_CLIP))


def bivariate_normal_cdf(h, k, rho):
    """P(Z1 <= h, Z2 <= k) for a standard bivariate normal with correlation rho.

    Integrates the derivative in rho from 0 (independence) to rho.
    """
    h, k = float(h), float(k)
    if math.isinf(h) or math.isinf(k):
        if h == -math.inf or k == -math.inf:
            return 0.0
        return float(special.ndtr(min(h, k)))
    base = special.ndtr(h) * special.ndtr(k)
    if rho == 0.0:
        return float(base)

    def dens(r):
        s = 1.0 - r * r
        return math.exp(-(h * h - 2.0 * r * h * k + k * k) / (2.0 * s)) / math.sqrt(s)

    if abs(rho) >= 1.0:
        return float(special.ndtr(min(h, k)) if rho > 0 else max(0.0, special.ndtr(h) - special.ndtr(-k)))
    val, _ = integrate.quad(dens, 0.0, rho, epsabs=1e-12, epsrel=1e-10, limit=200)
    return float(np.clip(base + val / (2.0 * math.pi), 0.0, 1.0))


class Copula:
    dimension = 0

    def to_independent_normal(self, v):
        """Map normal scores (n, d) to independent standard normals."""
        raise NotImplementedError

    def from_independent_normal(self, u):
        raise NotImplementedError

    def sample(self, n, rng):
        z = rng.standard_normal((int(n), self.dimension))
        return special.ndtr(self.from_independent_normal(z))

    def logpdf(self, u):
        raise NotImplementedError

    def pdf(self, u):
        return np.exp(self.logpdf(u))

    def cdf(self, u):
        raise NotImplementedError

    @property
    def correlation(self):
        """Correlation matrix of the normal scores."""
        raise NotImplementedError

    @property
    def is_independent(self):
        return np.array_equal(self.correlation, np.eye(self.dimension))

    def _qmc_cdf(self, u, m=2**16):
        """Quasi-Monte Carlo P(U <= u) from a Halton set pushed through the copula."""
        u = as_array(u, self.dimension)
        if self.dimension > len(_PRIMES):
            raise DistributionError("QMC copula cdf limited to 21 dimensions")
        idx = np.arange(1, m + 1, dtype=np.int64)
        H = np.column_stack([radical_inverse(idx, b) for b in _PRIMES[: self.dimension]])
        pts = special.ndtr(self.from_independent_normal(special.ndtri(H)))
        return np.array([np.mean(np.all(pts <= row, axis=1)) for row in u])


class IndependentCopula(Copula):
    def __init__(self, dimension):
        if int(dimension) < 1:
            raise DistributionError("copula dimension must be positive")
        self.dimension = int(dimension)

    def __repr__(self):
        return f"IndependentCopula({self.dimension})"

    def __eq__(self, other):
        return isinstance(other, IndependentCopula) and other.dimension == self.dimension

    def to_independent_normal(self, v):
        return np.array(v, dtype=float)

    def from_independent_normal(self, u):
        return np.array(u, dtype=float)

    def sample(self, n, rng):
        return rng.random((int(n), self.dimension))

    def logpdf(self, u):
        u = as_array(u, self.dimension)
        inside = np.all((u >= 0) & (u <= 1), axis=1)
        return np.where(inside, 0.0, -np.inf)

    def cdf(self, u):
        return np.prod(np.clip(as_array(u, self.dimension), 0.0, 1.0), axis=1)

    @property
    def correlation(self):
        return np.eye(self.dimension)

    def to_dict(self):
        return {"kind": "independent", "dimension": self.dimension}


class NormalCopula(Copula):
    """Gaussian copula with correlation matrix R (normal-score scale)."""

    def __init__(self, R):
        R = np.atleast_2d(np.asarray(R, dtype=float))
        if R.ndim != 2 or R.shape[0] != R.shape[1]:
            raise DistributionError("correlation matrix must be square")
        if not np.allclose(R, R.T, atol=1e-12):
            raise DistributionError("correlation matrix must be symmetric")
        if not np.allclose(np.diag(R), 1.0, atol=1e-12):
            raise DistributionError("correlation matrix must have a unit diagonal")
        try:
            self.L = np.linalg.cholesky(R)
        except np.linalg.LinAlgError:
            raise DistributionError("correlation matrix is not positive definite") from None
        self.R = R
        self.dimension = R.shape[0]
        self._logdet = 2.0 * np.sum(np.log(np.diag(self.L)))
        self._Rinv_minus_I = np.linalg.inv(R) - np.eye(self.dimension)

    @classmethod
    def from_pairs(cls, dimension, pairs):
        """Build from {(i, j): rho} entries, unspecified pairs independent."""
        R = np.eye(dimension)
        for (i, j), rho in pairs.items():
            R[i, j] = R[j, i] = rho
        return cls(R)

    def __repr__(self):
        return f"NormalCopula({self.R.tolist()})"

    def __eq__(self, other):
        return isinstance(other, NormalCopula) and np.array_equal(other.R, self.R)

    def to_independent_normal(self, v):
        v = as_array(v, self.dimension)
        return linalg.solve_triangular(self.L, v.T, lower=True).T

    def from_independent_normal(self, u):
        return as_array(u, self.dimension) @ self.L.T

    def logpdf(self, u):
        u = as_array(u, self.dimension)
        z = _normal_scores(u)
        q = np.einsum("ni,ij,nj->n", z, self._Rinv_minus_I, z)
        inside = np.all((u > 0) & (u < 1), axis=1)
        return np.where(inside, -0.5 * self._logdet - 0.5 * q, -np.inf)

    def cdf(self, u):
        u = np.clip(as_array(u, self.dimension), 0.0, 1.0)
        if self.dimension == 1:
            return u[:, 0].copy()
        if self.dimension == 2:
            with np.errstate(divide="ignore"):
                z = special.ndtri(u)
            return np.array([bivariate_normal_cdf(a, b, self.R[0, 1]) for a, b in z])
        return self._qmc_cdf(u)

    @property
    def correlation(self):
        return self.R

    def to_dict(self):
        return {"kind": "normal", "R": self.R.tolist()}


class ComposedCopula(Copula):
    """Block-diagonal aggregation: blocks are mutually independent."""

    def __init__(self, blocks):
        self.blocks = list(blocks)
        if not self.blocks:
            raise DistributionError("a composed copula needs at least one block")
        self.dimension = sum(b.dimension for b in self.blocks)
        self._slices = []
        start = 0
        for b in self.blocks:
            self._slices.append(slice(start, start + b.dimension))
            start += b.dimension

    def __repr__(self):
        return f"ComposedCopula({self.blocks!r})"

    def __eq__(self, other):
        return isinstance(other, ComposedCopula) and other.blocks == self.blocks

    def _blockwise(self, method, x):
        x = as_array(x, self.dimension)
        return np.hstack([getattr(b, method)(x[:, s]) for b, s in zip(self.blocks, self._slices)])

    def to_independent_normal(self, v):
        return self._blockwise("to_independent_normal", v)

    def from_independent_normal(self, u):
        return self._blockwise("from_independent_normal", u)

    def sample(self, n, rng):
        return np.hstack([b.sample(n, rng) for b in self.blocks])

    def logpdf(self, u):
        u = as_array(u, self.dimension)
        return sum(b.logpdf(u[:, s]) for b, s in zip(self.blocks, self._slices))

    def cdf(self, u):
        u = as_array(u, self.dimension)
        return np.prod([b.cdf(u[:, s]) for b, s in zip(self.blocks, self._slices)], axis=0)

    @property
    def correlation(self):
        return linalg.block_diag(*[b.correlation for b in self.blocks])

    def to_dict(self):
        return {"kind": "composed", "blocks": [b.to_dict() for b in self.blocks]}


def make_copula(spec, dimension=None):
    if isinstance(spec, Copula):
        return spec
    if spec is None:
        return IndependentCopula(dimension)
    kind = spec.get("kind", "independent")
    if kind == "independent":
        return IndependentCopula(spec.get("dimension", dimension))
    if kind == "normal":
        if "R" in spec:
            return NormalCopula(spec["R"])
        dim = spec.get("dimension", dimension)
        return NormalCopula.from_pairs(dim, {tuple(p[:2]): p[2] for p in spec.get("pairs", [])})
    if kind == "composed":
        return ComposedCopula([make_copula(b) for b in spec["blocks"]])
    raise DistributionError(f"unknown copula kind {kind!r}; supported: composed, independent, normal")


class JointDistribution:
    """Margins F_i tied by a copula C: F(x) = C(F_1(x_1), ..., F_d(x_d))."""

    def __init__(self, margins, copula=None, names=None):
        self.margins = [make_distribution(m) for m in margins]
        if not self.margins:
            raise DistributionError("a joint distribution needs at least one margin")
        self.copula = IndependentCopula(len(self.margins)) if copula is None else copula
        if self.copula.dimension != len(self.margins):
            raise DistributionError(
                f"copula dimension {self.copula.dimension} != {len(self.margins)} margins"
            )
        self.names = list(names or [f"x{i}" for i in range(len(self.margins))])
        if len(self.names) != len(self.margins):
            raise DistributionError("one name per margin")

    @property
    def dimension(self):
        return len(self.margins)

    def __repr__(self):
        return f"JointDistribution({self.names}, {self.copula!r})"

    # ------------------------------------------------------------ scales

    def to_uniform(self, x):
        x = as_array(x, self.dimension)
        return np.column_stack([np.asarray(m.cdf(x[:, i]), dtype=float) for i, m in enumerate(self.margins)])

    def from_uniform(self, u):
        u = as_array(u, self.dimension)
        return np.column_stack([np.asarray(m.quantile(u[:, i]), dtype=float) for i, m in enumerate(self.margins)])

    def from_normal_scores(self, v):
        """x_i = F_i^{-1}(Phi(v_i))."""
        return self.from_uniform(special.ndtr(as_array(v, self.dimension)))

    # ------------------------------------------------------------ sampling

    def sample(self, n, rng) -> Sample:
        u = self.copula.sample(n, rng)
        return Sample(self.from_uniform(u), self.names)

    # ------------------------------------------------------------ densities

    def logpdf(self, x):
        x = as_array(x, self.dimension)
        lp = np.zeros(x.shape[0])
        for i, m in enumerate(self.margins):
            lp = lp + np.asarray(m.logpdf(x[:, i]), dtype=float)
        if not isinstance(self.copula, IndependentCopula):
            lp = lp + self.copula.logpdf(self.to_uniform(x))
        return lp

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def cdf(self, x):
        return self.copula.cdf(self.to_uniform(x))

    # ------------------------------------------------------------ moments

    def mean(self):
        return np.array([m.mean() for m in self.margins])

    def std(self):
        return np.sqrt([m.variance() for m in self.margins])

    def covariance(self, nodes=48):
        """Covariance matrix of X.

        Pairs linked by a normal copula use a tensor Gauss-Hermite rule on
        the normal scores.
        """
        d = self.dimension
        sd = self.std()
        cov = np.diag(sd**2)
        R = self.copula.correlation
        if np.any(R != np.eye(d)):
            t, w = special.roots_hermitenorm(nodes)
            w = w / w.sum()
            mu = self.mean()
            for i in range(d):
                for j in range(i + 1, d):
                    r = R[i, j]
                    if r == 0.0:
                        continue
                    z1 = t[:, None]
                    z2 = r * t[:, None] + math.sqrt(1.0 - r * r) * t[None, :]
                    # outer Hermite nodes reach |z| ~ 13 where ndtr rounds to 1
                    xi = np.asarray(self.margins[i].quantile(np.clip(special.ndtr(z1), U_CLIP, 1 - U_CLIP)), dtype=float)
                    xj = np.asarray(self.margins[j].quantile(np.clip(special.ndtr(z2), U_CLIP, 1 - U_CLIP)), dtype=float)
                    c = np.sum(w[:, None] * w[None, :] * (xi - mu[i]) * (xj - mu[j]))
                    cov[i, j] = cov[j, i] = c
        return cov

    def correlation(self):
        """Pearson correlation matrix of X."""
        cov = self.covariance()
        s = np.sqrt(np.diag(cov))
        return cov / np.outer(s, s)

    # ------------------------------------------------------------ structure

    def marginal(self, i):
        if isinstance(i, str):
            i = self.names.index(i)
        return self.margins[i]

    def to_dict(self):
        return {
            "names": list(self.names),
            "margins": [m.to_dict() for m in self.margins],
            "copula": self.copula.to_dict(),
        }

    @classmethod
    def from_dict(cls, spec):
        margins = [make_distribution(m) for m in spec["margins"]]
        return cls(margins, make_copula(spec.get("copula"), len(margins)), spec.get("names"))


def compose(margins, copula=None, names=None):
    return JointDistribution(margins, copula, names)


def extract_copula(source):
    """Copula of a joint law, or a normal copula fitted on rank normal scores."""
    if isinstance(source, JointDistribution):
        return source.copula
    x = as_array(source)
    n, d = x.shape
    if n < 3:
        raise DistributionError("need at least 3 points to fit a copula")
    from scipy.stats import rankdata

    ranks = np.column_stack([rankdata(x[:, j]) for j in range(d)])
    z = special.ndtri(ranks / (n + 1.0))
    R = np.atleast_2d(np.corrcoef(z, rowvar=False))
    R = 0.5 * (R + R.T)
    np.fill_diagonal(R, 1.0)
    return NormalCopula(R)

