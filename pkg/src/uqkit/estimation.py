"""Fitting laws to data, goodness-of-fit tests, kernel smoothing, MCMC.

Kolmogorov p-values are exact (Marsaglia-Tsang-Wang matrix power).  The
Anderson-Darling test is the normal case with estimated mean and variance
(case 3): A* = A^2 (1 + 0.75/n + 2.25/n^2) with D'Agostino's piecewise
p-value approximation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special, stats

from . import kernels
from .distributions import (
    Beta,
    Exponential,
    Gamma,
    Gumbel,
    Normal,
    Triangular,
    Uniform,
    UnivariateDistribution,
)
from .distributions.univariate import _bisect
from .sample import Sample

__all__ = [
    "FitResult",
    "TestResult",
    "FitError",
    "fit_mle",
    "fit_moments",
    "ks_test",
    "ks_pvalue",
    "chi2_test",
    "ad_test",
    "KernelDensity",
    "kernel_smooth",
    "silverman_bandwidth",
    "qq_plot_data",
    "henry_line_data",
    "MHResult",
    "mh_calibrate",
    "effective_sample_size",
]


class FitError(ValueError):
    pass


@dataclass
class FitResult:
    distribution: UnivariateDistribution
    log_likelihood: float
    method: str

    @property
    def parameters(self):
        return self.distribution.parameters


@dataclass
class TestResult:
    statistic: float
    p_value: float
    threshold: float
    method: str

    @property
    def accepted(self):
        return self.p_value > self.threshold


def _data(sample):
    x = np.asarray(sample, dtype=float).ravel()
    if x.size and not np.all(np.isfinite(x)):
        raise FitError("sample contains non-finite values")
    return x


_FAMILY_NAMES = {
    "normal": Normal,
    "uniform": Uniform,
    "triangular": Triangular,
    "gumbel": Gumbel,
    "beta": Beta,
    "exponential": Exponential,
    "gamma": Gamma,
}
_FREE = {Normal: 2, Uniform: 2, Triangular: 3, Gumbel: 2, Beta: 2, Exponential: 1, Gamma: 2}


def _family(family):
    if isinstance(family, str):
        try:
            return _FAMILY_NAMES[family.lower()]
        except KeyError:
            raise FitError(f"no factory for {family!r}; supported: {', '.join(sorted(_FAMILY_NAMES))}") from None
    if family not in _FREE:
        raise FitError(f"no factory for {family!r}")
    return family


def _prepare(family, sample):
    fam = _family(family)
    x = _data(sample)
    if x.size < _FREE[fam] + 1:
        raise FitError(f"need at least {_FREE[fam] + 1} points to fit {fam.__name__}")
    if np.ptp(x) == 0.0:
        raise FitError("degenerate sample (zero variance)")
    return fam, x


def _loglik(dist, x):
    return float(np.sum(dist.logpdf(x)))


def _bounds_from_data(x, bounds):
    if bounds is not None:
        a, b = map(float, bounds)
        if x.min() < a or x.max() > b:
            raise FitError(f"sample outside the support [{a}, {b}]")
        return a, b
    span = np.ptp(x)
    return x.min() - span / x.size, x.max() + span / x.size


def _minimize(nll, z0):
    res = optimize.minimize(nll, z0, method="L-BFGS-B", options={"maxiter": 500})
    if not res.success and res.nit >= 500:
        raise FitError(f"likelihood maximisation did not converge: {res.message}")
    return res.x


def fit_mle(family, sample, bounds=None) -> FitResult:
    """Maximum likelihood.

    Normal, Uniform and Exponential use closed forms; Gumbel, Gamma and
    Beta a bounded quasi-Newton on log-parameters.  Beta and Triangular
    need a support: ``bounds`` or the data range widened by one spacing.
    Triangular profiles the likelihood over the mode, which is attained at
    an order statistic.
    """
    fam, x = _prepare(family, sample)
    n = x.size
    if fam is Normal:
        dist = Normal(x.mean(), x.std())
    elif fam is Uniform:
        dist = Uniform(x.min(), x.max())
    elif fam is Exponential:
        dist = Exponential(1.0 / x.mean())
    elif fam is Gumbel:
        a0 = math.pi / (x.std() * math.sqrt(6.0))
        b0 = x.mean() - 0.5772156649015329 / a0

        def nll(z):
            return -_loglik(Gumbel(math.exp(z[0]), b0 + z[1] / a0), x)

        z = _minimize(nll, np.array([math.log(a0), 0.0]))
        dist = Gumbel(math.exp(z[0]), b0 + z[1] / a0)
    elif fam is Gamma:
        if x.min() <= 0:
            raise FitError("Gamma fit needs positive data")
        m, v = x.mean(), x.var()

        def nll(z):
            return -_loglik(Gamma(math.exp(z[0]), math.exp(z[1])), x)

        z = _minimize(nll, np.log([m * m / v, m / v]))
        dist = Gamma(math.exp(z[0]), math.exp(z[1]))
    elif fam is Beta:
        a, b = _bounds_from_data(x, bounds)
        y = (x - a) / (b - a)
        m, v = y.mean(), y.var()
        common = max(m * (1 - m) / v - 1.0, 1e-3)
        p0, q0 = m * common, (1 - m) * common

        def nll(z):
            p, q = math.exp(z[0]), math.exp(z[1])
            return -_loglik(Beta(p, p + q, a, b), x)

        z = _minimize(nll, np.log([p0, q0]))
        p, q = math.exp(z[0]), math.exp(z[1])
        dist = Beta(p, p + q, a, b)
    elif fam is Triangular:
        a, b = _bounds_from_data(x, bounds)
        candidates = np.unique(x if n <= 4000 else np.quantile(x, np.linspace(0, 1, 4001)))
        ll = [_loglik(Triangular(a, m, b), x) for m in candidates]
        dist = Triangular(a, candidates[int(np.argmax(ll))], b)
    ll = _loglik(dist, x)
    if not math.isfinite(ll):
        raise FitError("fitted law gives the sample zero likelihood")
    return FitResult(dist, ll, "mle")


def fit_moments(family, sample, bounds=None) -> FitResult:
    """Match the first k sample moments (unbiased variance)."""
    fam, x = _prepare(family, sample)
    m, s = x.mean(), x.std(ddof=1)
    if fam is Normal:
        dist = Normal(m, s)
    elif fam is Uniform:
        dist = Uniform(m - math.sqrt(3.0) * s, m + math.sqrt(3.0) * s)
    elif fam is Exponential:
        dist = Exponential(1.0 / m)
    elif fam is Gumbel:
        alpha = math.pi / (s * math.sqrt(6.0))
        dist = Gumbel(alpha, m - 0.5772156649015329 / alpha)
    elif fam is Gamma:
        dist = Gamma(m * m / (s * s), m / (s * s))
    elif fam is Beta:
        a, b = _bounds_from_data(x, bounds)
        mu, var = (m - a) / (b - a), (s / (b - a)) ** 2
        t = mu * (1 - mu) / var - 1.0
        if t <= 0:
            raise FitError("sample variance too large for a Beta law on this support")
        dist = Beta(mu * t, t, a, b)
    elif fam is Triangular:
        a, b = _bounds_from_data(x, bounds)
        dist = Triangular(a, float(np.clip(3.0 * m - a - b, a, b)), b)
    ll = _loglik(dist, x)
    return FitResult(dist, ll, "moments")


# ---------------------------------------------------------------- tests


def ks_pvalue(n, d):
    """1 - P(D_n < d), exact."""
    return float(min(1.0, max(0.0, 1.0 - kernels.ks_cdf(n, d))))


def ks_test(sample, dist, threshold=0.05) -> TestResult:
    x = np.sort(_data(sample))
    n = x.size
    if n == 0:
        raise ValueError("Kolmogorov test on an empty sample")
    F = np.asarray(dist.cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
    return TestResult(d, ks_pvalue(n, d), threshold, "kolmogorov")


def chi2_test(sample, dist, bins=None, fitted_parameters=0, threshold=0.05) -> TestResult:
    """Pearson chi-square on equiprobable bins (default ceil(2 n^(2/5)) bins)."""
    x = _data(sample)
    n = x.size
    if n == 0:
        raise ValueError("chi-square test on an empty sample")
    k = int(bins) if bins is not None else int(math.ceil(2.0 * n ** 0.4))
    dof = k - 1 - int(fitted_parameters)
    if dof < 1:
        raise ValueError("not enough bins for the degrees of freedom")
    u = np.asarray(dist.cdf(x), dtype=float)
    counts = np.bincount(np.minimum((u * k).astype(int), k - 1), minlength=k)
    expected = n / k
    stat = float(np.sum((counts - expected) ** 2) / expected)
    return TestResult(stat, float(stats.chi2.sf(stat, dof)), threshold, "chi2")


def _ad_case3_pvalue(a_star):
    a = a_star
    if a >= 0.6:
        p = math.exp(1.2937 - 5.709 * a + 0.0186 * a * a)
    elif a >= 0.34:
        p = math.exp(0.9177 - 4.279 * a - 1.38 * a * a)
    elif a >= 0.2:
        p = 1.0 - math.exp(-8.318 + 42.796 * a - 59.938 * a * a)
    else:
        p = 1.0 - math.exp(-13.436 + 101.14 * a - 223.73 * a * a)
    return min(1.0, max(0.0, p))


def ad_test(sample, dist=None, threshold=0.05) -> TestResult:
    """Anderson-Darling normality test with estimated parameters.

    ``dist`` defaults to the normal law with the sample mean and unbiased
    standard deviation; a supplied normal law is treated as estimated from
    the same data, which is what the case-3 p-value assumes.
    """
    x = np.sort(_data(sample))
    n = x.size
    if n < 8:
        raise ValueError("Anderson-Darling needs at least 8 points")
    if dist is None:
        dist = Normal(x.mean(), x.std(ddof=1))
    if not isinstance(dist, Normal):
        raise ValueError("the Anderson-Darling test is implemented for normal laws")
    z = (x - dist.mu) / dist.sigma
    logF = special.log_ndtr(z)
    logS = special.log_ndtr(-z)
    i = np.arange(1, n + 1)
    a2 = -n - np.sum((2 * i - 1) * (logF + logS[::-1])) / n
    a_star = a2 * (1.0 + 0.75 / n + 2.25 / n**2)
    return TestResult(float(a2), _ad_case3_pvalue(a_star), threshold, "anderson-darling")


# ---------------------------------------------------------------- kernel smoothing


def silverman_bandwidth(x):
    x = _data(x)
    if x.size < 2:
        raise FitError("kernel smoothing needs at least 2 points")
    s = x.std(ddof=1)
    if s == 0.0:
        raise FitError("degenerate sample (zero variance)")
    return s * (4.0 / (3.0 * x.size)) ** 0.2


class KernelDensity(UnivariateDistribution):
    """Gaussian-kernel density, optionally mirrored at known bounds.

    With bounds the data are reflected once about each bound and the
    resulting estimate is restricted to [lower, upper] and divided by its
    mass there, so it integrates to one exactly.
    """

    def __init__(self, data, bandwidth=None, lower=None, upper=None):
        self.data = np.sort(_data(data))
        self.h = silverman_bandwidth(self.data) if bandwidth is None else float(bandwidth)
        if not self.h > 0:
            raise FitError("bandwidth must be positive")
        self.lower = -math.inf if lower is None else float(lower)
        self.upper = math.inf if upper is None else float(upper)
        centers = [self.data]
        if math.isfinite(self.lower):
            centers.append(2.0 * self.lower - self.data)
        if math.isfinite(self.upper):
            centers.append(2.0 * self.upper - self.data)
        self.centers = np.concatenate(centers)
        self._mass = 1.0
        self._mass = float((self._raw_cdf(self.upper) - self._raw_cdf(self.lower))[0])

    @property
    def bandwidth(self):
        return self.h

    @property
    def support(self):
        return (self.lower, self.upper)

    def _raw_cdf(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty(x.shape)
        for s in range(0, x.size, 256):
            out[s:s + 256] = special.ndtr((x[s:s + 256, None] - self.centers[None, :]) / self.h).sum(axis=1)
        return out / self.data.size

    def pdf(self, x):
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        dens = kernels.gaussian_kernel_sum(xa, self.centers, self.h) * (self.centers.size / self.data.size)
        dens = np.where((xa >= self.lower) & (xa <= self.upper), dens / self._mass, 0.0)
        return float(dens[0]) if np.ndim(x) == 0 else dens.reshape(np.shape(x))

    def cdf(self, x):
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        c = np.clip(xa, self.lower, self.upper)
        lo = self._raw_cdf(np.array([self.lower]))[0] if math.isfinite(self.lower) else 0.0
        out = np.clip((self._raw_cdf(c) - lo) / self._mass, 0.0, 1.0)
        return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        lo = self.lower if math.isfinite(self.lower) else self.data[0] - 40 * self.h
        hi = self.upper if math.isfinite(self.upper) else self.data[-1] + 40 * self.h
        q = _bisect(self.cdf, p, lo, hi, iterations=100, rtol=1e-13)
        return float(q) if p.ndim == 0 else q

    def mean(self):
        if not (math.isfinite(self.lower) or math.isfinite(self.upper)):
            return float(self.data.mean())
        return super().mean()

    def variance(self):
        if not (math.isfinite(self.lower) or math.isfinite(self.upper)):
            return float(self.data.var() + self.h**2)
        return super().variance()


def kernel_smooth(sample, bandwidth=None, bounds=None) -> KernelDensity:
    lower, upper = (None, None) if bounds is None else bounds
    return KernelDensity(sample, bandwidth, lower, upper)


# ---------------------------------------------------------------- visual tests


def qq_plot_data(sample, reference):
    """Pairs (reference quantile, sample quantile) at p_i = (i - 0.5)/n.

    ``reference`` is a distribution or another sample (Hazen empirical
    quantiles, which are the order statistics themselves for equal sizes).
    """
    x = np.sort(_data(sample))
    n = x.size
    p = (np.arange(1, n + 1) - 0.5) / n
    if isinstance(reference, UnivariateDistribution):
        q = np.asarray(reference.quantile(p), dtype=float)
    elif np.size(reference) == n:
        q = np.sort(_data(reference))
    else:
        q = np.quantile(_data(reference), p, method="hazen")
    return Sample(np.column_stack([q, x]), ["model", "sample"])


def henry_line_data(sample):
    """QQ data against the fitted normal law plus that law's line parameters."""
    fit = fit_mle(Normal, sample).distribution
    qq = qq_plot_data(sample, Normal(0.0, 1.0))
    return qq, (fit.mu, fit.sigma)


# ---------------------------------------------------------------- Bayesian calibration


@dataclass
class MHResult:
    chain: Sample
    acceptance_rate: float
    log_posterior: np.ndarray


def _prior_logpdf(prior, theta):
    if hasattr(prior, "margins"):
        return float(prior.logpdf(theta[None, :])[0])
    return float(np.asarray(prior.logpdf(theta[0])))


def mh_calibrate(
    model,
    prior,
    observations,
    noise_sigma,
    n_steps,
    proposal_scale,
    rng,
    initial=None,
    burn_in=0,
    names=None,
):
    """Random-walk Metropolis on theta for Z_i = G_i(theta) + eps_i, eps ~ N(0, sigma^2).

    ``model(theta)`` returns the vector of predictions matching
    ``observations``.  ``prior`` is a univariate or joint law with a
    ``logpdf``.  Returns the post-burn-in chain.
    """
    obs = np.asarray(observations, dtype=float).ravel()
    dim = prior.dimension if hasattr(prior, "margins") else 1
    scale = np.broadcast_to(np.asarray(proposal_scale, dtype=float), (dim,))
    theta = np.asarray(prior.mean() if initial is None else initial, dtype=float).reshape(dim)
    sigma2 = float(noise_sigma) ** 2

    def log_post(t):
        lp = _prior_logpdf(prior, t)
        if not math.isfinite(lp):
            return -math.inf
        if obs.size == 0:
            return lp
        pred = np.asarray(model(t), dtype=float).ravel()
        return lp - 0.5 * float(np.sum((obs - pred) ** 2)) / sigma2

    current = log_post(theta)
    if not math.isfinite(current):
        raise ValueError("initial point has zero posterior (prior) mass")
    n_steps, burn_in = int(n_steps), int(burn_in)
    chain = np.empty((n_steps, dim))
    logs = np.empty(n_steps)
    accepted = 0
    steps = rng.standard_normal((n_steps + burn_in, dim)) * scale
    logu = np.log(rng.random(n_steps + burn_in))
    for k in range(n_steps + burn_in):
        prop = theta + steps[k]
        lp = log_post(prop)
        if logu[k] < lp - current:
            theta, current = prop, lp
            if k >= burn_in:
                accepted += 1
        if k >= burn_in:
            chain[k - burn_in] = theta
            logs[k - burn_in] = current
    names = names or [f"theta{i}" for i in range(dim)]
    return MHResult(Sample(chain, names), accepted / max(n_steps, 1), logs)


def effective_sample_size(chain):
    """Geyer initial-positive-sequence ESS of a 1-D chain."""
    x = np.asarray(chain, dtype=float).ravel()
    n = x.size
    x = x - x.mean()
    var = x.var()
    if var == 0.0:
        return float(n)
    f = np.fft.rfft(x, 2 * n)
    acf = np.fft.irfft(f * np.conj(f))[:n] / (var * n)
    tau = -1.0
    for k in range(0, n - 1, 2):
        pair = acf[k] + acf[k + 1]
        if pair <= 0:
            break
        tau += 2.0 * pair
    return float(n / max(tau, 1.0 / n))
