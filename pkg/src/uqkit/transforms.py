"""Iso-probabilistic maps between physical space X and standard space U.

Nataf (normal copula): v_i = Phi^{-1}(F_i(x_i)) then u = L^{-1} v with
L L^T = R.  Rosenblatt (independent or block-composed copulas) conditions
the components in margin order; with the copulas supported here every
conditional cdf is Gaussian on the normal-score scale, so both maps share
the same triangular solve and Rosenblatt on an independent copula is Nataf
with R = I.
"""
from __future__ import annotations

import warnings

import numpy as np
from scipy import special

from .distributions.multivariate import U_CLIP, JointDistribution, NormalCopula
from .model import Model
from .sample import as_array

__all__ = ["IsoProbabilisticTransform", "make_transform", "standard_event", "ClippingWarning"]

_LOG_SQRT2PI = 0.5 * np.log(2.0 * np.pi)


class ClippingWarning(UserWarning):
    pass


class IsoProbabilisticTransform:
    def __init__(self, joint: JointDistribution):
        self.joint = joint
        self.kind = "nataf" if isinstance(joint.copula, NormalCopula) else "rosenblatt"
        self.dimension = joint.dimension
        self.clipped = False

    def __repr__(self):
        return f"IsoProbabilisticTransform({self.kind}, d={self.dimension})"

    # normal scores with the smaller tail kept exact
    def _scores(self, x):
        cols = []
        for i, m in enumerate(self.joint.margins):
            F = np.asarray(m.cdf(x[:, i]), dtype=float)
            S = np.asarray(m.sf(x[:, i]), dtype=float)
            lower = np.clip(F, U_CLIP, 1.0)
            upper = np.clip(S, U_CLIP, 1.0)
            if np.any(F < U_CLIP) or np.any(S < U_CLIP):
                self.clipped = True
                warnings.warn(f"cdf of {self.joint.names[i]} clipped to [{U_CLIP}, 1 - {U_CLIP}]", ClippingWarning, stacklevel=3)
            cols.append(np.where(F <= 0.5, special.ndtri(lower), -special.ndtri(upper)))
        return np.column_stack(cols)

    def to_standard(self, x):
        x = as_array(x, self.dimension)
        for i, m in enumerate(self.joint.margins):
            lo, hi = m.support
            if np.any(x[:, i] < lo) or np.any(x[:, i] > hi):
                raise ValueError(f"component {self.joint.names[i]} outside its support [{lo}, {hi}]")
        return self.joint.copula.to_independent_normal(self._scores(x))

    def from_standard(self, u):
        u = as_array(u, self.dimension)
        v = self.joint.copula.from_independent_normal(u)
        cols = []
        for i, m in enumerate(self.joint.margins):
            vi = v[:, i]
            cols.append(np.asarray(m.quantile(special.ndtr(vi)), dtype=float))
        return np.column_stack(cols)

    def jacobian(self, u):
        """dx/du at one standard point, shape (d, d)."""
        u = np.asarray(u, dtype=float).reshape(1, self.dimension)
        v = self.joint.copula.from_independent_normal(u)[0]
        x = self.from_standard(u)[0]
        f = np.array([float(m.pdf(xi)) for m, xi in zip(self.joint.margins, x)])
        phi = np.exp(-0.5 * v * v - _LOG_SQRT2PI)
        L = self.joint.copula.from_independent_normal(np.eye(self.dimension)).T
        return (phi / f)[:, None] * L

    def logpdf_via_standard(self, x):
        """Joint log-density from the change of variables (consistency check)."""
        x = as_array(x, self.dimension)
        v = self._scores(x)
        u = self.joint.copula.to_independent_normal(v)
        L = self.joint.copula.from_independent_normal(np.eye(self.dimension)).T
        logdet_Linv = -np.log(np.abs(np.linalg.det(L)))
        lf = sum(np.asarray(m.logpdf(x[:, i]), dtype=float) for i, m in enumerate(self.joint.margins))
        lphi_v = np.sum(-0.5 * v * v - _LOG_SQRT2PI, axis=1)
        lphi_u = np.sum(-0.5 * u * u - _LOG_SQRT2PI, axis=1)
        return lphi_u + lf - lphi_v + logdet_Linv


def make_transform(joint):
    return IsoProbabilisticTransform(joint)


def standard_event(model: Model, transform: IsoProbabilisticTransform, threshold, comparison=">", output=0):
    """Standard-space limit state; failure is ``g_U(u) > 0``.

    For ``>``/``>=`` g_U(u) = G(T^{-1}(u)) - s, for ``<``/``<=`` it is
    s - G(T^{-1}(u)).  The gradient follows the chain rule with the
    closed-form Jacobian of T^{-1}.
    """
    if comparison not in (">", ">=", "<", "<="):
        raise ValueError(f"unknown comparison {comparison!r}")
    sign = 1.0 if comparison in (">", ">=") else -1.0
    s = float(threshold)

    def g(U):
        X = transform.from_standard(U)
        return sign * (model(X)[:, output] - s)

    def grad(u):
        x = transform.from_standard(u)[0]
        gx = model.gradient(x)[output]
        return sign * (transform.jacobian(u).T @ gx)

    gm = Model.from_function(g, transform.dimension, 1, vectorized=True, gradient=grad,
                             input_names=[f"u{i}" for i in range(transform.dimension)],
                             output_names=["g"])
    gm.physical_model = model
    return gm
