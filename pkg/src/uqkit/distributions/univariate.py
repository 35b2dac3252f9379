"""Univariate laws: parametric families, truncation, mixtures, pushforwards.

Parametric families accept array-valued parameters and broadcast them
against their arguments; conditional constructions rely on this to draw one
variate per parameter vector without building one object per row.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special

__all__ = [
    "UnivariateDistribution",
    "DistributionError",
    "Normal",
    "Uniform",
    "Triangular",
    "Gumbel",
    "Beta",
    "Exponential",
    "Gamma",
    "Dirac",
    "Truncated",
    "Mixture",
    "Composite",
    "truncate",
    "mixture",
    "composite",
    "make_distribution",
    "FAMILIES",
]

EULER_GAMMA = 0.5772156649015329
_SQRT2PI = math.sqrt(2.0 * math.pi)


class DistributionError(ValueError):
    pass


def _param(x):
    a = np.asarray(x, dtype=float)
    return float(a) if a.ndim == 0 else a


def _require(cond, message, **values):
    if not np.all(cond):
        bad = {k: (v if np.ndim(v) == 0 else np.asarray(v)[~np.asarray(cond)][:5].tolist()) for k, v in values.items()}
        raise DistributionError(f"{message}: {bad}")


def _scalar_out(x, out):
    return float(out) if np.ndim(out) == 0 else out


def _bisect(fun, target, lo, hi, iterations=200, rtol=1e-15):
    """Vectorised bisection for an increasing ``fun``: fun(x) = target."""
    target = np.asarray(target, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), target.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), target.shape).copy()
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        below = fun(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= rtol * np.maximum(1.0, np.abs(mid))):
            break
    return 0.5 * (lo + hi)


class UnivariateDistribution:
    """Common interface. Subclasses provide pdf, cdf, quantile and support."""

    n_parameters = 0

    def pdf(self, x):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def quantile(self, p):
        raise NotImplementedError

    @property
    def support(self):
        return (-math.inf, math.inf)

    def logpdf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self.pdf(x))

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def sample(self, n, rng):
        """Inverse-cdf sampling from a caller-owned generator."""
        return np.asarray(self.quantile(rng.random(int(n))), dtype=float)

    def _finite_range(self):
        lo, hi = self.support
        if not math.isfinite(lo):
            lo = float(self.quantile(1e-12))
        if not math.isfinite(hi):
            hi = float(self.quantile(1.0 - 1e-12))
        return lo, hi

    def _moment_integral(self, g):
        lo, hi = self._finite_range()
        val, _ = integrate.quad(
            lambda x: g(x) * float(self.pdf(x)), lo, hi, epsabs=1e-10, epsrel=1e-10, limit=500
        )
        return val

    def mean(self):
        return self._moment_integral(lambda x: x)

    def variance(self):
        m = self.mean()
        return self._moment_integral(lambda x: (x - m) ** 2)

    def std(self):
        return math.sqrt(self.variance())

    def moments(self):
        return self.mean(), self.variance()

    def truncate(self, lower=None, upper=None):
        return Truncated(self, lower, upper)

    def to_dict(self):
        raise NotImplementedError(f"{type(self).__name__} is not serialisable")


class _Parametric(UnivariateDistribution):
    family = ""
    param_names: tuple = ()

    @property
    def parameters(self):
        return tuple(getattr(self, n) for n in self.param_names)

    def __repr__(self):
        args = ", ".join(f"{n}={getattr(self, n)!r}" for n in self.param_names)
        return f"{type(self).__name__}({args})"

    def __eq__(self, other):
        return type(self) is type(other) and all(
            np.array_equal(a, b) for a, b in zip(self.parameters, other.parameters)
        )

    def __hash__(self):
        return hash((type(self).__name__,) + tuple(np.asarray(p).tobytes() for p in self.parameters))

    def to_dict(self):
        return {"family": self.family, "params": [float(p) for p in self.parameters]}


class Normal(_Parametric):
    family = "normal"
    param_names = ("mu", "sigma")
    n_parameters = 2

    def __init__(self, mu=0.0, sigma=1.0):
        self.mu, self.sigma = _param(mu), _param(sigma)
        _require(self.sigma > 0, "Normal needs sigma > 0", sigma=self.sigma)

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.sigma
        return _scalar_out(x, np.exp(-0.5 * z * z) / (self.sigma * _SQRT2PI))

    def logpdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.sigma
        return -0.5 * z * z - np.log(self.sigma * _SQRT2PI)

    def cdf(self, x):
        return _scalar_out(x, special.ndtr((np.asarray(x, dtype=float) - self.mu) / self.sigma))

    def sf(self, x):
        return _scalar_out(x, special.ndtr(-(np.asarray(x, dtype=float) - self.mu) / self.sigma))

    def quantile(self, p):
        return _scalar_out(p, self.mu + self.sigma * special.ndtri(np.asarray(p, dtype=float)))

    def mean(self):
        return self.mu

    def variance(self):
        return self.sigma**2


class Uniform(_Parametric):
    family = "uniform"
    param_names = ("a", "b")
    n_parameters = 2

    def __init__(self, a=-1.0, b=1.0):
        self.a, self.b = _param(a), _param(b)
        _require(np.asarray(self.a) < self.b, "Uniform needs a < b", a=self.a, b=self.b)

    @property
    def support(self):
        return (self.a, self.b)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_out(x, np.where((x >= self.a) & (x <= self.b), 1.0 / (self.b - self.a), 0.0))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_out(x, np.clip((x - self.a) / (self.b - self.a), 0.0, 1.0))

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        return _scalar_out(p, self.a + p * (self.b - self.a))

    def mean(self):
        return 0.5 * (self.a + self.b)

    def variance(self):
        return (self.b - self.a) ** 2 / 12.0


class Triangular(_Parametric):
    family = "triangular"
    param_names = ("a", "m", "b")
    n_parameters = 3

    def __init__(self, a=-1.0, m=0.0, b=1.0):
        self.a, self.m, self.b = _param(a), _param(m), _param(b)
        _require(np.asarray(self.a) < self.b, "Triangular needs a < b", a=self.a, b=self.b)
        _require((np.asarray(self.a) <= self.m) & (np.asarray(self.m) <= self.b), "Triangular needs a <= m <= b", m=self.m)

    @property
    def support(self):
        return (self.a, self.b)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        a, m, b = self.a, self.m, self.b
        w = b - a
        with np.errstate(divide="ignore", invalid="ignore"):
            left = 2.0 * (x - a) / (w * (m - a))
            right = 2.0 * (b - x) / (w * (b - m))
        out = np.where(x < m, left, right)
        out = np.where((x < a) | (x > b), 0.0, out)
        return _scalar_out(x, np.nan_to_num(out, nan=2.0 / w, posinf=2.0 / w))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        a, m, b = self.a, self.m, self.b
        w = b - a
        with np.errstate(divide="ignore", invalid="ignore"):
            left = (x - a) ** 2 / (w * (m - a))
            right = 1.0 - (b - x) ** 2 / (w * (b - m))
        out = np.where(x <= m, np.where(x <= a, 0.0, left), np.where(x >= b, 1.0, right))
        return _scalar_out(x, np.clip(np.nan_to_num(out, nan=0.0), 0.0, 1.0))

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        a, m, b = self.a, self.m, self.b
        w = b - a
        pm = (m - a) / w
        out = np.where(
            p < pm,
            a + np.sqrt(np.clip(p * w * (m - a), 0.0, None)),
            b - np.sqrt(np.clip((1.0 - p) * w * (b - m), 0.0, None)),
        )
        return _scalar_out(p, out)

    def mean(self):
        return (self.a + self.m + self.b) / 3.0

    def variance(self):
        a, m, b = self.a, self.m, self.b
        return (a * a + m * m + b * b - a * b - a * m - b * m) / 18.0


class Gumbel(_Parametric):
    """Maximum-type Gumbel law, F(x) = exp(-exp(-alpha (x - beta)))."""

    family = "gumbel"
    param_names = ("alpha", "beta")
    n_parameters = 2

    def __init__(self, alpha=1.0, beta=0.0):
        self.alpha, self.beta = _param(alpha), _param(beta)
        _require(self.alpha > 0, "Gumbel needs alpha > 0", alpha=self.alpha)

    def pdf(self, x):
        z = self.alpha * (np.asarray(x, dtype=float) - self.beta)
        with np.errstate(over="ignore"):
            return _scalar_out(x, self.alpha * np.exp(-z - np.exp(-z)))

    def logpdf(self, x):
        z = self.alpha * (np.asarray(x, dtype=float) - self.beta)
        with np.errstate(over="ignore"):
            return np.log(self.alpha) - z - np.exp(-z)

    def cdf(self, x):
        z = self.alpha * (np.asarray(x, dtype=float) - self.beta)
        with np.errstate(over="ignore"):
            return _scalar_out(x, np.exp(-np.exp(-z)))

    def sf(self, x):
        z = self.alpha * (np.asarray(x, dtype=float) - self.beta)
        with np.errstate(over="ignore"):
            return _scalar_out(x, -np.expm1(-np.exp(-z)))

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        with np.errstate(divide="ignore"):
            return _scalar_out(p, self.beta - np.log(-np.log(p)) / self.alpha)

    def mean(self):
        return self.beta + EULER_GAMMA / self.alpha

    def variance(self):
        return math.pi**2 / (6.0 * self.alpha**2)


class Beta(_Parametric):
    """Beta law on [a, b] with shape pair (r, t - r)."""

    family = "beta"
    param_names = ("r", "t", "a", "b")
    n_parameters = 4

    def __init__(self, r=2.0, t=4.0, a=-1.0, b=1.0):
        self.r, self.t, self.a, self.b = _param(r), _param(t), _param(a), _param(b)
        _require(self.r > 0, "Beta needs r > 0", r=self.r)
        _require(np.asarray(self.t) > self.r, "Beta needs t > r", r=self.r, t=self.t)
        _require(np.asarray(self.a) < self.b, "Beta needs a < b", a=self.a, b=self.b)

    @property
    def support(self):
        return (self.a, self.b)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        p, q = self.r, self.t - self.r
        w = self.b - self.a
        y = (x - self.a) / w
        inside = (y >= 0) & (y <= 1)
        yc = np.clip(y, 1e-300, 1.0)
        oc = np.clip(1.0 - y, 1e-300, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            lp = (p - 1) * np.log(yc) + (q - 1) * np.log(oc) - special.betaln(p, q) - np.log(w)
        return np.where(inside, lp, -np.inf)

    def pdf(self, x):
        return _scalar_out(x, np.exp(self.logpdf(x)))

    def cdf(self, x):
        y = (np.asarray(x, dtype=float) - self.a) / (self.b - self.a)
        return _scalar_out(x, special.betainc(self.r, self.t - self.r, np.clip(y, 0.0, 1.0)))

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        return _scalar_out(p, self.a + (self.b - self.a) * special.betaincinv(self.r, self.t - self.r, p))

    def mean(self):
        return self.a + (self.b - self.a) * self.r / self.t

    def variance(self):
        return (self.b - self.a) ** 2 * self.r * (self.t - self.r) / (self.t**2 * (self.t + 1.0))


class Exponential(_Parametric):
    family = "exponential"
    param_names = ("lam", "gamma")
    n_parameters = 2

    def __init__(self, lam=1.0, gamma=0.0):
        self.lam, self.gamma = _param(lam), _param(gamma)
        _require(self.lam > 0, "Exponential needs lambda > 0", lam=self.lam)

    @property
    def support(self):
        return (self.gamma, math.inf)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore"):
            out = np.where(x >= self.gamma, self.lam * np.exp(-self.lam * (x - self.gamma)), 0.0)
        return _scalar_out(x, out)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_out(x, np.where(x > self.gamma, -np.expm1(-self.lam * (x - self.gamma)), 0.0))

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        with np.errstate(divide="ignore"):
            return _scalar_out(p, self.gamma - np.log1p(-p) / self.lam)

    def mean(self):
        return self.gamma + 1.0 / self.lam

    def variance(self):
        return 1.0 / self.lam**2


class Gamma(_Parametric):
    family = "gamma"
    param_names = ("k", "lam", "gamma")
    n_parameters = 3

    def __init__(self, k=1.0, lam=1.0, gamma=0.0):
        self.k, self.lam, self.gamma = _param(k), _param(lam), _param(gamma)
        _require(self.k > 0, "Gamma needs k > 0", k=self.k)
        _require(self.lam > 0, "Gamma needs lambda > 0", lam=self.lam)

    @property
    def support(self):
        return (self.gamma, math.inf)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        y = x - self.gamma
        with np.errstate(divide="ignore", invalid="ignore"):
            lp = self.k * np.log(self.lam) + (self.k - 1) * np.log(y) - self.lam * y - special.gammaln(self.k)
        return np.where(y > 0, lp, -np.inf)

    def pdf(self, x):
        return _scalar_out(x, np.exp(self.logpdf(x)))

    def cdf(self, x):
        y = np.asarray(x, dtype=float) - self.gamma
        return _scalar_out(x, special.gammainc(self.k, np.clip(self.lam * y, 0.0, None)))

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        return _scalar_out(p, self.gamma + special.gammaincinv(self.k, p) / self.lam)

    def mean(self):
        return self.gamma + self.k / self.lam

    def variance(self):
        return self.k / self.lam**2


class Dirac(_Parametric):
    """Point mass; used for degenerate parameters and constant steps."""

    family = "dirac"
    param_names = ("value",)
    n_parameters = 1

    def __init__(self, value=0.0):
        self.value = _param(value)

    @property
    def support(self):
        return (self.value, self.value)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_out(x, np.where(x == self.value, np.inf, 0.0))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_out(x, np.where(x >= self.value, 1.0, 0.0))

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        return _scalar_out(p, np.full(p.shape, self.value) if p.ndim else self.value)

    def mean(self):
        return self.value

    def variance(self):
        return 0.0


# ---------------------------------------------------------------- wrappers


class Truncated(UnivariateDistribution):
    """``base`` restricted to [lower, upper] and renormalised."""

    def __init__(self, base, lower=None, upper=None):
        self.base = base
        lo, hi = base.support
        self.lower = -math.inf if lower is None else float(lower)
        self.upper = math.inf if upper is None else float(upper)
        if self.lower >= self.upper:
            raise DistributionError(f"empty truncation interval [{self.lower}, {self.upper}]")
        self._Fl = 0.0 if self.lower <= lo else float(base.cdf(self.lower))
        self._Fu = 1.0 if self.upper >= hi else float(base.cdf(self.upper))
        self.mass = self._Fu - self._Fl
        if not self.mass > 1e-12:
            raise DistributionError(f"truncation keeps mass {self.mass:.3g} <= 1e-12")

    def __repr__(self):
        return f"Truncated({self.base!r}, {self.lower}, {self.upper})"

    @property
    def support(self):
        lo, hi = self.base.support
        return (max(lo, self.lower), min(hi, self.upper))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        out = np.where((x >= lo) & (x <= hi), self.base.pdf(x) / self.mass, 0.0)
        return _scalar_out(x, out)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_out(x, np.clip((self.base.cdf(x) - self._Fl) / self.mass, 0.0, 1.0))

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        lo, hi = self.support
        q = np.clip(self.base.quantile(self._Fl + p * self.mass), lo, hi)
        q = np.where(p <= 0.0, lo, np.where(p >= 1.0, hi, q))
        return _scalar_out(p, q)

    def to_dict(self):
        d = self.base.to_dict()
        d["truncate"] = [
            None if math.isinf(self.lower) else self.lower,
            None if math.isinf(self.upper) else self.upper,
        ]
        return d


class Mixture(UnivariateDistribution):
    """Weighted mixture; weights are normalised to sum to one."""

    def __init__(self, components, weights=None):
        self.components = list(components)
        if not self.components:
            raise DistributionError("a mixture needs at least one component")
        w = np.ones(len(self.components)) if weights is None else np.asarray(weights, dtype=float)
        if w.shape != (len(self.components),) or np.any(w <= 0):
            raise DistributionError("mixture weights must be positive, one per component")
        self.weights = w / w.sum()

    def __repr__(self):
        return f"Mixture({self.components!r}, {self.weights.tolist()})"

    @property
    def support(self):
        sup = [c.support for c in self.components]
        return (min(s[0] for s in sup), max(s[1] for s in sup))

    def pdf(self, x):
        return _scalar_out(x, sum(w * np.asarray(c.pdf(x)) for w, c in zip(self.weights, self.components)))

    def cdf(self, x):
        return _scalar_out(x, sum(w * np.asarray(c.cdf(x)) for w, c in zip(self.weights, self.components)))

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        qs = np.array([np.asarray(c.quantile(np.clip(p, 1e-300, 1 - 1e-16)), dtype=float) for c in self.components])
        lo, hi = qs.min(axis=0), qs.max(axis=0)
        q = np.where(hi > lo, _bisect(self.cdf, p, lo, hi), lo)
        slo, shi = self.support
        q = np.where(p <= 0.0, slo, np.where(p >= 1.0, shi, q))
        return _scalar_out(p, q)

    def sample(self, n, rng):
        n = int(n)
        which = rng.choice(len(self.components), size=n, p=self.weights)
        u = rng.random(n)
        out = np.empty(n)
        for k, c in enumerate(self.components):
            mask = which == k
            if mask.any():
                out[mask] = c.quantile(u[mask])
        return out

    def mean(self):
        return float(sum(w * c.mean() for w, c in zip(self.weights, self.components)))

    def variance(self):
        m = self.mean()
        second = sum(w * (c.variance() + c.mean() ** 2) for w, c in zip(self.weights, self.components))
        return float(second - m * m)

    def to_dict(self):
        return {
            "family": "mixture",
            "components": [c.to_dict() for c in self.components],
            "weights": self.weights.tolist(),
        }


class Composite(UnivariateDistribution):
    """Law of f(X) for X ~ base and f strictly monotone on the support of X.

    ``f`` is a formula in the variable ``x`` (string or
    :class:`~uqkit.expression.Expression`) or a vectorised callable.
    """

    def __init__(self, f, base, derivative=None):
        from ..expression import Expression, parse_expression

        if isinstance(f, str):
            f = parse_expression(f, ["x"])
        self.base = base
        self.formula = f if isinstance(f, Expression) else None
        if self.formula is not None:
            expr = self.formula
            self._f = lambda x: _scalar_out(x, expr.evaluate(np.asarray(x, dtype=float).reshape(-1, 1)).reshape(np.shape(x)))
            dexpr = expr.derivative(expr.input_names[0])
            self._df = lambda x: dexpr.evaluate(np.asarray(x, dtype=float).reshape(-1, 1)).reshape(np.shape(x))
        else:
            self._f = f
            self._df = derivative
        self._lo_x, self._hi_x = self._x_range()
        grid = np.linspace(self._lo_x, self._hi_x, 1024)
        fg = np.asarray(self._f(grid), dtype=float)
        diffs = np.diff(fg)
        if np.all(diffs > 0):
            self.increasing = True
        elif np.all(diffs < 0):
            self.increasing = False
        else:
            raise DistributionError("pushforward function is not strictly monotone on the support")

    def _x_range(self):
        lo, hi = self.base.support
        if not math.isfinite(lo):
            lo = float(self.base.quantile(1e-15))
        if not math.isfinite(hi):
            hi = float(self.base.quantile(1.0 - 1e-15))
        return lo, hi

    @property
    def support(self):
        lo, hi = self.base.support
        with np.errstate(all="ignore"):
            ends = [float(self._f(np.array(v))) if math.isfinite(v) else v for v in (lo, hi)]
        if not math.isfinite(lo):
            ends[0] = -math.inf if self.increasing else math.inf
        if not math.isfinite(hi):
            ends[1] = math.inf if self.increasing else -math.inf
        return (min(ends), max(ends))

    def inverse(self, y):
        """f^{-1}(y) by bracketed bisection on the base support."""
        y = np.asarray(y, dtype=float)
        if self.increasing:
            return _bisect(lambda x: np.asarray(self._f(x)), y, self._lo_x, self._hi_x, rtol=1e-13)
        return _bisect(lambda x: -np.asarray(self._f(x)), -y, self._lo_x, self._hi_x, rtol=1e-13)

    def cdf(self, y):
        y = np.asarray(y, dtype=float)
        lo, hi = self.support
        x = self.inverse(np.clip(y, *self._f_range()))
        F = np.asarray(self.base.cdf(x))
        out = F if self.increasing else 1.0 - F
        out = np.where(y <= lo, 0.0, np.where(y >= hi, 1.0, out))
        return _scalar_out(y, out)

    def _f_range(self):
        a, b = float(self._f(np.array(self._lo_x))), float(self._f(np.array(self._hi_x)))
        return (min(a, b), max(a, b))

    def pdf(self, y):
        y = np.asarray(y, dtype=float)
        flo, fhi = self._f_range()
        inside = (y > flo) & (y < fhi)
        x = self.inverse(np.clip(y, flo, fhi))
        if self._df is not None:
            dfx = np.asarray(self._df(x), dtype=float)
        else:
            h = np.maximum(1e-6 * np.abs(x), 1e-8)
            dfx = (np.asarray(self._f(x + h)) - np.asarray(self._f(x - h))) / (2 * h)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.asarray(self.base.pdf(x)) / np.abs(dfx)
        return _scalar_out(y, np.where(inside, np.nan_to_num(out, nan=0.0, posinf=0.0), 0.0))

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        q0 = self.base.quantile(p if self.increasing else 1.0 - p)
        with np.errstate(all="ignore"):
            return _scalar_out(p, np.asarray(self._f(np.asarray(q0, dtype=float)), dtype=float))

    def sample(self, n, rng):
        return np.asarray(self._f(self.base.sample(n, rng)), dtype=float)

    def _moment_integral(self, g):
        lo, hi = self._x_range()
        val, _ = integrate.quad(
            lambda x: g(float(self._f(np.array(x)))) * float(self.base.pdf(x)),
            lo, hi, epsabs=1e-10, epsrel=1e-10, limit=500,
        )
        return val


# ---------------------------------------------------------------- helpers


def truncate(dist, lower=None, upper=None):
    return Truncated(dist, lower, upper)


def mixture(components, weights=None):
    return Mixture(components, weights)


def composite(f, base):
    return Composite(f, base)


FAMILIES = {
    "normal": Normal,
    "uniform": Uniform,
    "triangular": Triangular,
    "gumbel": Gumbel,
    "beta": Beta,
    "exponential": Exponential,
    "gamma": Gamma,
    "dirac": Dirac,
}


def make_distribution(spec):
    """Build a distribution from its ``to_dict`` form.

    ``{"family": "gumbel", "params": [1.8e-3, 1014], "truncate": [0, null]}``
    """
    if isinstance(spec, UnivariateDistribution):
        return spec
    family = str(spec.get("family", "")).lower()
    if family == "mixture":
        dist = Mixture([make_distribution(c) for c in spec["components"]], spec.get("weights"))
    elif family in FAMILIES:
        params = spec.get("params", [])
        if isinstance(params, dict):
            dist = FAMILIES[family](**params)
        else:
            dist = FAMILIES[family](*params)
    else:
        raise DistributionError(
            f"unknown distribution family {spec.get('family')!r}; supported: "
            f"{', '.join(sorted(list(FAMILIES) + ['mixture']))}"
        )
    if spec.get("truncate") is not None:
        lo, hi = spec["truncate"]
        dist = Truncated(dist, lo, hi)
    return dist
