"""Polynomial chaos expansions.

The surrogate is g_hat(x) = sum_k alpha_k Psi_k(T(x)) where T maps the
inputs onto the product measure of the basis families:

* independent inputs with Normal, Uniform, Beta, Gamma or Exponential
  margins use the matching family through an affine map;
* anything else goes through the iso-probabilistic transform to
  independent standard normals and an all-Hermite basis.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..distributions import (
    Beta,
    Exponential,
    Gamma,
    IndependentCopula,
    JointDistribution,
    Normal,
    Uniform,
)
from ..model import Model
from ..transforms import make_transform
from .polynomials import Hermite, Jacobi, Laguerre, Legendre, enumerate_multi_indices

__all__ = [
    "InputMap",
    "ChaosExpansion",
    "chaos_fit",
    "chaos_sobol",
    "matched_family",
    "UnsupportedMarginError",
    "IllConditionedError",
]

MAX_CONDITION = 1e10


class UnsupportedMarginError(ValueError):
    pass


class IllConditionedError(np.linalg.LinAlgError):
    pass


def _scalar(v):
    return float(np.asarray(v))


def matched_family(margin):
    """(family, shift, scale) with z = (x - shift) / scale for a supported margin."""
    if isinstance(margin, Normal):
        return Hermite(), _scalar(margin.mu), _scalar(margin.sigma)
    if isinstance(margin, Uniform):
        a, b = _scalar(margin.a), _scalar(margin.b)
        return Legendre(), 0.5 * (a + b), 0.5 * (b - a)
    if isinstance(margin, Beta):
        r, t, a, b = (_scalar(v) for v in (margin.r, margin.t, margin.a, margin.b))
        return Jacobi(t - r - 1.0, r - 1.0), 0.5 * (a + b), 0.5 * (b - a)
    if isinstance(margin, Gamma):
        return Laguerre(_scalar(margin.k) - 1.0), _scalar(margin.gamma), 1.0 / _scalar(margin.lam)
    if isinstance(margin, Exponential):
        return Laguerre(0.0), _scalar(margin.gamma), 1.0 / _scalar(margin.lam)
    raise UnsupportedMarginError(f"no orthonormal family for a {type(margin).__name__} margin")


class InputMap:
    """T: physical inputs -> basis measure, with its inverse."""

    def __init__(self, joint: JointDistribution, mode="auto"):
        if mode not in ("auto", "matched", "hermite"):
            raise ValueError("mode is 'auto', 'matched' or 'hermite'")
        self.joint = joint
        matched = None
        if mode in ("auto", "matched"):
            try:
                if not isinstance(joint.copula, IndependentCopula):
                    raise UnsupportedMarginError("margin-matched families need independent inputs")
                matched = [matched_family(m) for m in joint.margins]
            except UnsupportedMarginError:
                if mode == "matched":
                    raise
        if matched is not None:
            self.mode = "matched"
            self.families = [m[0] for m in matched]
            self.shift = np.array([m[1] for m in matched])
            self.scale = np.array([m[2] for m in matched])
            self.transform = None
        else:
            self.mode = "hermite"
            self.families = [Hermite() for _ in joint.margins]
            self.transform = make_transform(joint)

    def forward(self, x):
        x = np.asarray(x, dtype=float).reshape(-1, self.joint.dimension)
        if self.mode == "matched":
            return (x - self.shift) / self.scale
        return self.transform.to_standard(x)

    def inverse(self, z):
        z = np.asarray(z, dtype=float).reshape(-1, self.joint.dimension)
        if self.mode == "matched":
            return self.shift + z * self.scale
        return self.transform.from_standard(z)

    def to_dict(self):
        return {"mode": self.mode, "joint": self.joint.to_dict()}


def design_matrix(families, indices, z):
    z = np.asarray(z, dtype=float)
    idx = np.asarray(indices, dtype=int).reshape(len(indices), -1)
    top = idx.max(axis=0)
    cols = [fam.evaluate(z[:, j], int(top[j])) for j, fam in enumerate(families)]
    Psi = np.ones((z.shape[0], idx.shape[0]))
    for j in range(idx.shape[1]):
        Psi *= cols[j][:, idx[:, j]]
    return Psi


@dataclass
class ChaosExpansion:
    families: list
    indices: list
    coefficients: np.ndarray  # (K, p)
    input_map: InputMap | None = None
    residual: np.ndarray = None
    relative_error: np.ndarray = None
    output_names: list = field(default_factory=lambda: ["y0"])

    @property
    def dimension(self):
        return len(self.families)

    @property
    def size(self):
        return len(self.indices)

    def composed(self, z):
        """h(z) = sum_k alpha_k Psi_k(z), shape (n, p)."""
        z = np.asarray(z, dtype=float).reshape(-1, self.dimension)
        return design_matrix(self.families, self.indices, z) @ self.coefficients

    def __call__(self, x):
        if self.input_map is None:
            raise ValueError("expansion has no input map; use composed(z)")
        single = np.ndim(x) == 1
        out = self.composed(self.input_map.forward(x))
        return out[0] if single else out

    def as_model(self, input_names=None):
        names = input_names or (self.input_map.joint.names if self.input_map else None)
        return Model.from_function(lambda X: self(X), self.dimension, self.coefficients.shape[1],
                                   vectorized=True, input_names=names, output_names=list(self.output_names))

    @property
    def mean(self):
        return self.coefficients[0].copy()

    @property
    def variance(self):
        return np.sum(self.coefficients[1:] ** 2, axis=0)


def _gauss_product(families, nodes):
    rules = [f.gauss(n) for f, n in zip(families, nodes)]
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    wgrids = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    Z = np.column_stack([g.ravel() for g in grids])
    W = np.prod(np.stack([w.ravel() for w in wgrids]), axis=0)
    return Z, W


def _least_squares(Psi, Y):
    K = Psi.shape[1]
    if Psi.shape[0] < 2 * K:
        raise ValueError(f"least squares needs at least 2K = {2 * K} design points, got {Psi.shape[0]}")
    Q, R = np.linalg.qr(Psi)
    d = np.abs(np.diag(R))
    cond = np.linalg.cond(R) if d.min() > 0 else np.inf
    if not cond <= MAX_CONDITION:
        raise IllConditionedError(f"design condition number {cond:.3g} exceeds {MAX_CONDITION:g}")
    return np.linalg.solve(R, Q.T @ Y)


def chaos_fit(model: Model, joint: JointDistribution, degree=None, count=None, q=1.0,
              projection="least_squares", design=None, n=None, rng=None, nodes=None,
              cleaning=None, mode="auto", output=None):
    """Fit an expansion of ``model`` under ``joint``.

    Truncation: ``degree`` (all indices of q-norm <= degree) or ``count``
    (first indices of the enumeration).  ``cleaning`` is a dict with
    ``max_considered``, ``keep_count`` and ``significance`` (default 1e-4):
    the first max_considered indices are fitted by least squares, those with
    |alpha_k| >= significance * max_k>0 |alpha_k| are kept (largest first,
    at most keep_count, the constant always kept) and refitted.

    Projection:
    * ``least_squares``: on ``design`` (physical points) or an ``n``-point
      Monte Carlo sample of ``joint``; solved by QR.
    * ``integration``: Gauss product rule with ``nodes`` points per axis
      (default degree + 1).
    * ``integration_mc``: equal weights 1/n on a Monte Carlo sample.
    """
    imap = InputMap(joint, mode)
    d = joint.dimension
    if cleaning is not None:
        count = int(cleaning["max_considered"])
        degree = None
    if (degree is None) == (count is None):
        raise ValueError("give exactly one of degree and count")
    indices = enumerate_multi_indices(d, count=count, degree=degree, q=q)
    max_degree = max(sum(k) for k in indices)
    before = model.calls

    if projection == "integration":
        npts = nodes if nodes is not None else max_degree + 1
        npts = [int(npts)] * d if np.ndim(npts) == 0 else [int(v) for v in npts]
        Z, W = _gauss_product(imap.families, npts)
        X = imap.inverse(Z)
        Y = np.asarray(model(X), dtype=float)
    else:
        if design is not None:
            X = np.asarray(design, dtype=float).reshape(-1, d)
        else:
            if n is None or rng is None:
                raise ValueError("a design or (n, rng) is required")
            X = np.asarray(joint.sample(int(n), rng))
        Z = imap.forward(X)
        Y = np.asarray(model(X), dtype=float)
        W = np.full(X.shape[0], 1.0 / X.shape[0])
    if output is not None:
        Y = Y[:, [output]]
    Psi = design_matrix(imap.families, indices, Z)
    if projection == "integration" or projection == "integration_mc":
        coef = Psi.T @ (W[:, None] * Y)
    elif projection == "least_squares":
        coef = _least_squares(Psi, Y)
    else:
        raise ValueError(f"unknown projection {projection!r}")

    if cleaning is not None:
        keep_count = int(cleaning.get("keep_count", len(indices)))
        sig = float(cleaning.get("significance", 1e-4))
        mag = np.max(np.abs(coef), axis=1)
        mag0 = mag[1:].max() if len(mag) > 1 else 0.0
        cand = [k for k in np.argsort(-mag[1:], kind="stable") + 1 if mag[k] >= sig * mag0]
        kept = sorted([0] + cand[: max(keep_count - 1, 0)])
        indices = [indices[k] for k in kept]
        Psi = Psi[:, kept]
        coef = coef[kept] if projection != "least_squares" else _least_squares(Psi, Y)

    fitted = Psi @ coef
    res = Y - fitted
    resid = np.sqrt(np.sum(W[:, None] * res**2, axis=0))
    var = np.var(Y, axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(var > 0, resid**2 / np.where(var > 0, var, 1.0), 0.0)
    names = list(model.output_names)
    if output is not None:
        names = [names[output]]
    exp = ChaosExpansion(list(imap.families), [tuple(map(int, k)) for k in indices], coef, imap, resid, rel, names)
    exp.n_evaluations = model.calls - before
    exp.projection = projection
    return exp


def chaos_sobol(expansion: ChaosExpansion, output=0):
    """First-order and total indices from the squared coefficients."""
    idx = np.asarray(expansion.indices, dtype=int).reshape(expansion.size, -1)
    a2 = expansion.coefficients[:, output] ** 2
    nz = idx > 0
    nonconst = nz.any(axis=1)
    var = a2[nonconst].sum()
    if var == 0:
        raise ValueError("expansion has zero variance")
    only = nz & (nz.sum(axis=1) == 1)[:, None]
    first = (only * a2[:, None]).sum(axis=0) / var
    total = (nz * a2[:, None]).sum(axis=0) / var
    return first, total


