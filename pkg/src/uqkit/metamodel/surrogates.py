"""Local Taylor and global linear least-squares surrogates."""
from __future__ import annotations

import numpy as np

from ..model import Model

__all__ = ["taylor_surrogate", "linear_least_squares_surrogate"]


def taylor_surrogate(model: Model, point, order=1):
    """G(x0) + J (x - x0) [+ (x - x0)^T H (x - x0) / 2] per output."""
    if order not in (1, 2):
        raise ValueError("order is 1 or 2")
    x0 = np.asarray(point, dtype=float).ravel()
    g0 = np.asarray(model(x0), dtype=float)
    J = model.gradient(x0)
    H = model.hessian(x0) if order == 2 else None

    def f(X):
        D = X - x0
        out = g0 + D @ J.T
        if H is not None:
            out = out + 0.5 * np.einsum("ni,kij,nj->nk", D, H, D)
        return out

    return Model.from_function(f, x0.size, g0.size, vectorized=True,
                               input_names=list(model.input_names), output_names=list(model.output_names))


def linear_least_squares_surrogate(X, y, input_names=None, output_names=None):
    """Ordinary least squares with intercept, one fit per output column."""
    X = np.asarray(X, dtype=float)
    X = X[:, None] if X.ndim == 1 else X
    Y = np.asarray(y, dtype=float)
    Y = Y[:, None] if Y.ndim == 1 else Y
    n, d = X.shape
    if n <= d + 1:
        raise ValueError(f"need more than d + 1 = {d + 1} points, got {n}")
    D = np.column_stack([np.ones(n), X])
    coef, _, rank, _ = np.linalg.lstsq(D, Y, rcond=None)
    if rank < d + 1:
        raise np.linalg.LinAlgError("rank-deficient regression design")
    a0, A = coef[0], coef[1:]
    m = Model.from_function(lambda Z: a0 + Z @ A, d, Y.shape[1], vectorized=True,
                            gradient=lambda z: A.T.copy(), input_names=input_names, output_names=output_names)
    m.intercept, m.coefficients = a0, A.T
    return m
