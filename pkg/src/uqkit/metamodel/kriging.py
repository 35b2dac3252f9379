"""Kriging with a generalised linear trend.

Y(x) = f(x)^T beta + Z(x), Z a centred Gaussian process with covariance
sigma^2 r_theta(x, x').  For fixed theta the trend coefficients are the GLS
estimate, sigma^2 is profiled in closed form, and theta maximises

    l(theta) = -(n log sigma_hat^2 + log det R_theta) / 2

by coordinate-wise golden-section search on log theta: every axis is
split into ``restarts`` brackets, each searched, and the best kept.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

__all__ = ["KrigingModel", "kriging_fit", "kriging_predict", "trend_basis", "correlation", "loo_residuals"]

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
MAX_NUGGET = 1e-6


def trend_basis(kind, d):
    """Named trend as a function X (n, d) -> F (n, p)."""
    if kind == "constant":
        return lambda X: np.ones((X.shape[0], 1))
    if kind == "linear":
        return lambda X: np.column_stack([np.ones(X.shape[0]), X])
    if kind == "quadratic":
        iu = np.triu_indices(d)
        return lambda X: np.column_stack([np.ones(X.shape[0]), X, (X[:, :, None] * X[:, None, :])[:, iu[0], iu[1]]])
    raise ValueError(f"unknown trend {kind!r}; supported: constant, linear, quadratic")


def correlation(kind, X1, X2, theta):
    """squared_exponential: exp(-|h/theta|^2 / 2); exponential: exp(-|h/theta|)."""
    D = (X1[:, None, :] - X2[None, :, :]) / theta
    r2 = np.sum(D * D, axis=2)
    if kind == "squared_exponential":
        return np.exp(-0.5 * r2)
    if kind == "exponential":
        return np.exp(-np.sqrt(r2))
    raise ValueError(f"unknown covariance {kind!r}; supported: squared_exponential, exponential")


@dataclass
class _Factor:
    theta: np.ndarray
    nugget: float
    chol: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray  # R^{-1}(y - F beta)
    sigma2: float
    loglik: float
    FtRiF_chol: np.ndarray


def _factor(X, y, F, kind, theta, nugget):
    n = X.shape[0]
    R = correlation(kind, X, X, theta)
    nug = nugget
    while True:
        try:
            L = linalg.cholesky(R + nug * np.eye(n), lower=True)
            break
        except linalg.LinAlgError:
            if nug >= MAX_NUGGET:
                raise np.linalg.LinAlgError("correlation matrix not positive definite even with nugget 1e-6")
            nug = max(nug * 10.0, 1e-14)
    Ft = linalg.solve_triangular(L, F, lower=True)
    yt = linalg.solve_triangular(L, y, lower=True)
    Q, Rf = np.linalg.qr(Ft)
    beta = linalg.solve_triangular(Rf, Q.T @ yt)
    rt = yt - Ft @ beta
    sigma2 = float(rt @ rt) / n
    gamma = linalg.solve_triangular(L.T, rt, lower=False)
    logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
    ll = -0.5 * (n * math.log(max(sigma2, 1e-300)) + logdet)
    return _Factor(np.asarray(theta, dtype=float), nug, L, beta, gamma, sigma2, ll, Rf)


def _golden(f, lo, hi, iterations=40):
    a, b = lo, hi
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iterations):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


@dataclass
class KrigingModel:
    X: np.ndarray
    y: np.ndarray
    trend: str
    covariance: str
    theta: np.ndarray
    sigma2: float
    beta: np.ndarray
    nugget: float
    loglik: float
    _factor: _Factor = field(repr=False, default=None)

    @property
    def dimension(self):
        return self.X.shape[1]

    def basis(self, X):
        return trend_basis(self.trend, self.dimension)(X)

    def predict(self, x):
        return kriging_predict(self, x)

    def __call__(self, x):
        return kriging_predict(self, x)[0]

    def to_dict(self):
        return {
            "kind": "kriging",
            "trend": self.trend,
            "covariance": self.covariance,
            "theta": self.theta.tolist(),
            "nugget": self.nugget,
            "X": self.X.tolist(),
            "y": self.y.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        return kriging_fit(np.array(data["X"], dtype=float), np.array(data["y"], dtype=float),
                           trend=data["trend"], covariance=data["covariance"],
                           theta=np.array(data["theta"], dtype=float), nugget=float(data["nugget"]))


def _prepare(X, y):
    X = np.asarray(X, dtype=float)
    X = X[:, None] if X.ndim == 1 else X
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.size:
        raise ValueError("X and y sizes differ")
    if np.unique(X, axis=0).shape[0] != X.shape[0]:
        raise ValueError("training points must be distinct")
    return X, y


def kriging_fit(X, y, trend="constant", covariance="squared_exponential", theta=None, theta_bounds=None,
                nugget=1e-10, restarts=10, sweeps=3):
    """Fit the process; ``theta`` fixes the scales, otherwise they are
    estimated inside ``theta_bounds`` (default: per axis [range/100, 2 range])."""
    X, y = _prepare(X, y)
    n, d = X.shape
    F = trend_basis(trend, d)(X)
    if n < F.shape[1]:
        raise ValueError(f"need n >= p = {F.shape[1]} training points")
    correlation(covariance, X[:1], X[:1], np.ones(d))
    if theta is None:
        span = np.ptp(X, axis=0)
        span = np.where(span > 0, span, 1.0)
        if theta_bounds is None:
            lo, hi = span / 100.0, 2.0 * span
        else:
            lo, hi = (np.broadcast_to(np.asarray(b, dtype=float), (d,)) for b in theta_bounds)
        llo, lhi = np.log(lo), np.log(hi)
        logt = 0.5 * (llo + lhi)

        def negll(lt):
            try:
                return -_factor(X, y, F, covariance, np.exp(lt), nugget).loglik
            except np.linalg.LinAlgError:
                return math.inf

        best = negll(logt)
        for _ in range(sweeps):
            previous = logt.copy()
            for j in range(d):
                edges = np.linspace(llo[j], lhi[j], restarts + 1)
                for a, b in zip(edges[:-1], edges[1:]):
                    def f1(v, j=j):
                        t = logt.copy()
                        t[j] = v
                        return negll(t)
                    v, fv = _golden(f1, a, b)
                    if fv < best:
                        best = fv
                        logt[j] = v
            if np.max(np.abs(logt - previous)) < 1e-6:
                break
        theta = np.exp(logt)
    theta = np.broadcast_to(np.asarray(theta, dtype=float), (d,)).copy()
    fac = _factor(X, y, F, covariance, theta, nugget)
    return KrigingModel(X, y, trend, covariance, theta, fac.sigma2, fac.beta, fac.nugget, fac.loglik, fac)


def kriging_predict(model: KrigingModel, x):
    """(mean, variance) at the rows of x; variance is the universal-kriging
    one, clipped at 0 (``model.clipped_variance`` set when that happens)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1 and model.dimension > 1 or x.ndim == 0
    x = x.reshape(-1, model.dimension)
    fac = model._factor
    r = correlation(model.covariance, x, model.X, model.theta)
    f = model.basis(x)
    mean = f @ model.beta + r @ fac.gamma
    rt = linalg.solve_triangular(fac.chol, r.T, lower=True)
    Ft = linalg.solve_triangular(fac.chol, model.basis(model.X), lower=True)
    u = Ft.T @ rt - f.T
    v = linalg.solve_triangular(fac.FtRiF_chol.T, u, lower=True)
    var = model.sigma2 * (1.0 - np.sum(rt * rt, axis=0) + np.sum(v * v, axis=0))
    model.clipped_variance = bool(np.any(var < 0))
    var = np.maximum(var, 0.0)
    if single:
        return float(mean[0]), float(var[0])
    return mean, var


def loo_residuals(model: KrigingModel):
    """Standardised leave-one-out residuals at fixed theta (closed form)."""
    fac = model._factor
    n = model.X.shape[0]
    Ri = linalg.cho_solve((fac.chol, True), np.eye(n))
    F = model.basis(model.X)
    RiF = Ri @ F
    Q = Ri - RiF @ np.linalg.solve(F.T @ RiF, RiF.T)
    Qy = Q @ model.y
    dq = np.diag(Q)
    return Qy / np.sqrt(model.sigma2 * dq)
