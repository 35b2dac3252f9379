"""Orthonormal polynomial families and multi-index enumeration.

Each family is described by the coefficients of its orthonormal
three-term recurrence

    z psi_n = b_{n+1} psi_{n+1} + a_n psi_n + b_n psi_{n-1},  psi_0 = 1,

with respect to a probability measure.  Gauss rules come from the
eigen-decomposition of the Jacobi matrix (Golub-Welsch).
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..distributions import Beta, Gamma, Normal, Uniform

__all__ = [
    "OrthonormalFamily",
    "Hermite",
    "Legendre",
    "Jacobi",
    "Laguerre",
    "make_family",
    "enumerate_multi_indices",
    "hyperbolic_norm",
]


class OrthonormalFamily:
    kind = "base"

    def recurrence(self, n):
        """Arrays a[0..n-1], b[0..n] (b[0] unused, set to 0)."""
        raise NotImplementedError

    def measure(self):
        raise NotImplementedError

    def to_dict(self):
        return {"kind": self.kind}

    def __eq__(self, other):
        return type(self) is type(other) and self.to_dict() == other.to_dict()

    def __repr__(self):
        args = ", ".join(f"{k}={v}" for k, v in self.to_dict().items() if k != "kind")
        return f"{type(self).__name__}({args})"

    def evaluate(self, z, degree):
        """Matrix (len(z), degree + 1) of psi_0..psi_degree at z."""
        z = np.asarray(z, dtype=float).ravel()
        a, b = self.recurrence(degree + 1)
        out = np.empty((z.size, degree + 1))
        out[:, 0] = 1.0
        if degree >= 1:
            out[:, 1] = (z - a[0]) / b[1]
        for n in range(1, degree):
            out[:, n + 1] = ((z - a[n]) * out[:, n] - b[n] * out[:, n - 1]) / b[n + 1]
        return out

    def __call__(self, degree, z):
        return self.evaluate(z, degree)[:, degree] if np.ndim(z) else float(self.evaluate([z], degree)[0, degree])

    def gauss(self, n):
        """n-point Gauss rule (nodes, weights); weights sum to 1."""
        a, b = self.recurrence(n)
        J = np.diag(a[:n]) + np.diag(b[1:n], 1) + np.diag(b[1:n], -1)
        nodes, vecs = np.linalg.eigh(J)
        return nodes, vecs[0, :] ** 2


class Hermite(OrthonormalFamily):
    """Orthonormal for N(0, 1)."""

    kind = "hermite"

    def recurrence(self, n):
        return np.zeros(n), np.sqrt(np.arange(n + 1, dtype=float))

    def measure(self):
        return Normal(0.0, 1.0)


class Legendre(OrthonormalFamily):
    """Orthonormal for U(-1, 1); psi_n(1) = sqrt(2n + 1)."""

    kind = "legendre"

    def recurrence(self, n):
        k = np.arange(1, n + 1, dtype=float)
        return np.zeros(n), np.concatenate([[0.0], k / np.sqrt(4.0 * k * k - 1.0)])

    def measure(self):
        return Uniform(-1.0, 1.0)


class Jacobi(OrthonormalFamily):
    """Orthonormal for the weight (1 - z)^alpha (1 + z)^beta on [-1, 1].

    With ``param=0`` (default) the measure is Beta(beta + 1, alpha + beta + 2,
    -1, 1); with ``param=1`` the two arguments are read as that Beta's
    (r, t) pair instead.
    """

    kind = "jacobi"

    def __init__(self, alpha=0.0, beta=0.0, param=0):
        if param == 1:
            r, t = float(alpha), float(beta)
            alpha, beta = t - r - 1.0, r - 1.0
        elif param != 0:
            raise ValueError("param is 0 or 1")
        if alpha <= -1 or beta <= -1:
            raise ValueError("Jacobi needs alpha, beta > -1")
        self.alpha, self.beta = float(alpha), float(beta)

    def to_dict(self):
        return {"kind": self.kind, "alpha": self.alpha, "beta": self.beta}

    def recurrence(self, n):
        al, be = self.alpha, self.beta
        k = np.arange(n, dtype=float)
        s = 2.0 * k + al + be
        with np.errstate(divide="ignore", invalid="ignore"):
            a = np.where(s * (s + 2) != 0, (be * be - al * al) / (s * (s + 2.0)), 0.0)
        a[0] = (be - al) / (al + be + 2.0)
        m = np.arange(1, n + 1, dtype=float)
        t = 2.0 * m + al + be
        with np.errstate(divide="ignore", invalid="ignore"):
            b2 = 4.0 * m * (m + al) * (m + be) * (m + al + be) / (t * t * (t + 1.0) * (t - 1.0))
        if n >= 1 and abs(al + be + 1.0) < 1e-14:
            # t - 1 vanishes at m = 1 when alpha + beta = -1; take the limit
            b2[0] = 4.0 * (1 + al) * (1 + be) / ((2.0 + al + be) ** 2 * (3.0 + al + be))
        return a, np.concatenate([[0.0], np.sqrt(b2)])

    def measure(self):
        return Beta(self.beta + 1.0, self.alpha + self.beta + 2.0, -1.0, 1.0)


class Laguerre(OrthonormalFamily):
    """Orthonormal for Gamma(k + 1, 1, 0), i.e. the weight z^k e^{-z}."""

    kind = "laguerre"

    def __init__(self, k=0.0):
        if k <= -1:
            raise ValueError("Laguerre needs k > -1")
        self.k = float(k)

    def to_dict(self):
        return {"kind": self.kind, "k": self.k}

    def recurrence(self, n):
        m = np.arange(n + 1, dtype=float)
        return 2.0 * m[:n] + self.k + 1.0, np.sqrt(m * (m + self.k))

    def measure(self):
        return Gamma(self.k + 1.0, 1.0, 0.0)


_KINDS = {"hermite": Hermite, "legendre": Legendre, "jacobi": Jacobi, "laguerre": Laguerre}


def make_family(spec):
    if isinstance(spec, OrthonormalFamily):
        return spec
    spec = dict(spec) if isinstance(spec, dict) else {"kind": spec}
    kind = str(spec.pop("kind")).lower()
    if kind not in _KINDS:
        raise ValueError(f"unknown polynomial family {kind!r}; supported: {', '.join(_KINDS)}")
    return _KINDS[kind](**spec)


# ---------------------------------------------------------------- enumeration


def hyperbolic_norm(index, q):
    k = np.asarray(index, dtype=float)
    if q == 1.0:
        return float(k.sum())
    nz = k[k > 0]
    return float((nz**q).sum() ** (1.0 / q)) if nz.size else 0.0


@lru_cache(maxsize=64)
def _graded(d, degree):
    """All multi-indices of total degree <= degree, graded, and within one
    grade in decreasing lexicographic order ((1,0) before (0,1))."""
    out = []
    for total in range(degree + 1):
        out.extend(_compositions(total, d))
    return tuple(out)


def _compositions(total, d):
    if d == 1:
        return [(total,)]
    res = []
    for first in range(total, -1, -1):
        res.extend((first,) + rest for rest in _compositions(total - first, d - 1))
    return res


def enumerate_multi_indices(d, count=None, q=1.0, degree=None):
    """First ``count`` multi-indices by q-quasi-norm, ties in graded order.

    q = 1 is the linear (graded) enumeration.  With ``degree`` instead of
    ``count`` every index of norm <= degree is returned.  The zero index
    always comes first.
    """
    if not 0.0 < q <= 1.0:
        raise ValueError("q must lie in (0, 1]")
    if (count is None) == (degree is None):
        raise ValueError("give exactly one of count and degree")
    d = int(d)
    # q-norm >= total degree, so indices of norm <= D all have degree <= D
    D = int(degree) if degree is not None else 0
    while True:
        cand = _graded(d, D)
        keyed = sorted(range(len(cand)), key=lambda i: (round(hyperbolic_norm(cand[i], q), 10), i))
        if degree is not None:
            return [cand[i] for i in keyed if hyperbolic_norm(cand[i], q) <= degree + 1e-10]
        if len(cand) >= count and hyperbolic_norm(cand[keyed[count - 1]], q) <= D + 1e-10:
            return [cand[i] for i in keyed[:count]]
        D += 1


def count_for_degree(d, degree, q=1.0):
    return len(enumerate_multi_indices(d, degree=degree, q=q))


