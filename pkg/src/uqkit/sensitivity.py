"""Sensitivity measures and plot data.

Correlation-based indices read a paired input/output sample; Sobol'
indices drive the model through the pick-freeze scheme.  For input
samples A, B and the hybrid A_B^i (column i taken from B):

* first order (Janon): pairs (y_B, y_ABi) share only x_i;
* total (Jansen): S_Ti = E[(y_A - y_ABi)^2] / (2 Var Y).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .distributions import IndependentCopula, JointDistribution
from .model import Model
from .sample import Sample

__all__ = [
    "SensitivityResult",
    "SobolResult",
    "pearson",
    "spearman",
    "src",
    "srrc",
    "sobol_pickfreeze",
    "scatter_matrix_data",
    "cobweb_data",
    "ranks",
]


@dataclass
class SensitivityResult:
    kind: str
    names: list
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def as_dict(self):
        return dict(zip(self.names, map(float, self.values)))

    def ranking(self):
        """Names by decreasing absolute value."""
        order = np.argsort(-np.abs(self.values), kind="stable")
        return [self.names[i] for i in order]


def _inputs(x):
    names = list(x.labels) if isinstance(x, Sample) else None
    X = np.asarray(x, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if names is None:
        names = [f"x{i}" for i in range(X.shape[1])]
    return X, names


def _output(y, n):
    Y = np.asarray(y, dtype=float)
    if Y.ndim == 2:
        if Y.shape[1] != 1:
            raise ValueError("a scalar output is required")
        Y = Y[:, 0]
    if Y.shape[0] != n:
        raise ValueError(f"{n} input rows but {Y.shape[0]} outputs")
    return Y


def ranks(a):
    """Average ranks (1..n) per column."""
    return stats.rankdata(a, axis=0, method="average")


def _pearson_cols(X, Y):
    Xc = X - X.mean(axis=0)
    Yc = Y - Y.mean()
    den = np.sqrt((Xc * Xc).sum(axis=0) * (Yc @ Yc))
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(den > 0, (Xc.T @ Yc) / np.where(den > 0, den, 1.0), np.nan)


def pearson(x, y):
    X, names = _inputs(x)
    Y = _output(y, X.shape[0])
    return SensitivityResult("pearson", names, _pearson_cols(X, Y), {"n": X.shape[0]})


def spearman(x, y):
    """Pearson on average ranks."""
    X, names = _inputs(x)
    Y = _output(y, X.shape[0])
    return SensitivityResult("spearman", names, _pearson_cols(ranks(X), ranks(Y)), {"n": X.shape[0]})


def _regression(X, Y, kind, names):
    n, d = X.shape
    if n <= d + 1:
        raise ValueError(f"need more than d + 1 = {d + 1} points, got {n}")
    sx = X.std(axis=0, ddof=1)
    if np.any(sx == 0):
        raise ValueError("input column with zero variance")
    D = np.column_stack([np.ones(n), X])
    coef, _, rank, _ = np.linalg.lstsq(D, Y, rcond=None)
    if rank < d + 1:
        raise np.linalg.LinAlgError("rank-deficient regression design")
    resid = Y - D @ coef
    sy = Y.std(ddof=1)
    tss = float(((Y - Y.mean()) ** 2).sum())
    r2 = 1.0 - float(resid @ resid) / tss if tss > 0 else 1.0
    values = coef[1:] * sx / sy if sy > 0 else np.zeros(d)
    return SensitivityResult(
        kind,
        names,
        values,
        {"n": n, "r2": r2, "intercept": float(coef[0]), "coefficients": coef[1:].tolist(),
         "squared": (values**2).tolist()},
    )


def src(x, y):
    """Standardised regression coefficients alpha_i sigma_i / sigma_Y (signed).

    ``metadata`` carries R^2, the intercept, the raw coefficients and the
    squared SRC values.
    """
    X, names = _inputs(x)
    return _regression(X, _output(y, X.shape[0]), "src", names)


def srrc(x, y):
    X, names = _inputs(x)
    Y = _output(y, X.shape[0])
    return _regression(ranks(X), ranks(Y), "srrc", names)


@dataclass
class SobolResult:
    names: list
    first_order: np.ndarray
    total_order: np.ndarray
    first_order_ci: np.ndarray
    total_order_ci: np.ndarray
    n: int
    n_evaluations: int
    flags: list = field(default_factory=list)

    def first(self):
        return SensitivityResult("sobol_first", self.names, self.first_order, {"ci": self.first_order_ci.tolist()})

    def total(self):
        return SensitivityResult("sobol_total", self.names, self.total_order, {"ci": self.total_order_ci.tolist()})


def _pickfreeze_indices(yA, yB, yAB):
    """yAB has shape (d, n); returns (first, total) arrays of length d."""
    m = 0.5 * (yB + yAB)
    first = (np.mean(yB * yAB, axis=1) - np.mean(m, axis=1) ** 2) / (
        np.mean(0.5 * (yB**2 + yAB**2), axis=1) - np.mean(m, axis=1) ** 2
    )
    var = np.var(np.concatenate([yA, yB]))
    total = 0.5 * np.mean((yA - yAB) ** 2, axis=1) / var
    return first, total


def sobol_pickfreeze(model: Model, joint: JointDistribution, n, rng, bootstrap=100, confidence=0.95, output=0):
    """First-order and total Sobol' indices from N(d + 2) evaluations.

    Bootstrap percentile intervals resample the N rows jointly.  Estimates
    are reported raw; inputs whose first-order value leaves [-0.05, 1.05]
    are listed in ``flags``.
    """
    if not isinstance(joint.copula, IndependentCopula):
        raise ValueError("pick-freeze indices need independent inputs")
    n, d = int(n), joint.dimension
    A = np.asarray(joint.sample(n, rng))
    B = np.asarray(joint.sample(n, rng))
    hybrids = []
    for i in range(d):
        H = A.copy()
        H[:, i] = B[:, i]
        hybrids.append(H)
    before = model.calls
    Yall = np.asarray(model(np.vstack([A, B] + hybrids)))[:, output]
    yA, yB = Yall[:n], Yall[n:2 * n]
    yAB = Yall[2 * n:].reshape(d, n)
    first, total = _pickfreeze_indices(yA, yB, yAB)
    boots_f = np.empty((bootstrap, d))
    boots_t = np.empty((bootstrap, d))
    for b in range(bootstrap):
        idx = rng.integers(0, n, n)
        boots_f[b], boots_t[b] = _pickfreeze_indices(yA[idx], yB[idx], yAB[:, idx])
    a = 0.5 * (1.0 - confidence)
    ci_f = np.quantile(boots_f, [a, 1.0 - a], axis=0).T
    ci_t = np.quantile(boots_t, [a, 1.0 - a], axis=0).T
    flags = [joint.names[i] for i in range(d) if not -0.05 <= first[i] <= 1.05]
    return SobolResult(list(joint.names), first, total, ci_f, ci_t, n, model.calls - before, flags)


# ---------------------------------------------------------------- plot data


@dataclass
class ScatterMatrixData:
    sample: Sample
    pairs: list


def scatter_matrix_data(x, y):
    """Every ordered pair of distinct columns over inputs then outputs."""
    X, names = _inputs(x)
    Yv = np.asarray(y, dtype=float)
    Yv = Yv[:, None] if Yv.ndim == 1 else Yv
    ynames = list(y.labels) if isinstance(y, Sample) else [f"y{j}" for j in range(Yv.shape[1])]
    if Yv.shape[0] != X.shape[0]:
        raise ValueError("input and output sizes differ")
    labels = names + ynames
    pairs = [(a, b) for a in labels for b in labels if a != b]
    return ScatterMatrixData(Sample(np.hstack([X, Yv]), labels), pairs)


def cobweb_data(x, y, band=(0.95, 1.0)):
    """Columns rescaled to [0, 1] plus a ``selected`` flag.

    A constant column maps to 0.5.  Rows are ranked by output (stable, so
    ties go by row order) and the ranks in [round(lo n), round(hi n)) are
    selected.
    """
    X, names = _inputs(x)
    Y = _output(y, X.shape[0])
    ynames = list(y.labels) if isinstance(y, Sample) else ["y"]
    lo, hi = band
    if not 0.0 <= lo <= hi <= 1.0:
        raise ValueError("band must satisfy 0 <= lo <= hi <= 1")
    M = np.column_stack([X, Y])
    mn, mx = M.min(axis=0), M.max(axis=0)
    span = mx - mn
    with np.errstate(invalid="ignore", divide="ignore"):
        Z = np.where(span > 0, (M - mn) / np.where(span > 0, span, 1.0), 0.5)
    n = M.shape[0]
    order = np.argsort(Y, kind="stable")
    sel = np.zeros(n)
    sel[order[int(round(lo * n)):int(round(hi * n))]] = 1.0
    return Sample(np.column_stack([Z, sel]), names + ynames[:1] + ["selected"])
