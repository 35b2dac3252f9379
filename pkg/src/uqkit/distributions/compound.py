"""Sampling-based sums of independent variables.

Densities of these laws are not computed; only sampling and exact first two
moments are provided.
"""
from __future__ import annotations

import numpy as np

from .univariate import DistributionError, make_distribution

__all__ = ["RandomSum", "LinearCombination"]


class RandomSum:
    """X = X_1 + ... + X_N with N ~ Poisson(lam) and X_i iid ~ component."""

    def __init__(self, component, lam):
        if not lam > 0:
            raise DistributionError(f"Poisson rate must be positive, got {lam}")
        self.component = make_distribution(component)
        self.lam = float(lam)

    def sample(self, n, rng):
        n = int(n)
        counts = rng.poisson(self.lam, size=n)
        draws = self.component.sample(int(counts.sum()), rng)
        rows = np.repeat(np.arange(n), counts)
        return np.bincount(rows, weights=draws, minlength=n).astype(float)

    def mean(self):
        return self.lam * self.component.mean()

    def variance(self):
        mu = self.component.mean()
        return self.lam * (self.component.variance() + mu * mu)


class LinearCombination:
    """X = a_0 + sum_i a_i X_i with independent X_i."""

    def __init__(self, a0, coefficients, components):
        self.a0 = float(a0)
        self.coefficients = np.asarray(coefficients, dtype=float)
        self.components = [make_distribution(c) for c in components]
        if self.coefficients.shape != (len(self.components),):
            raise DistributionError("one coefficient per component")

    def sample(self, n, rng):
        out = np.full(int(n), self.a0)
        for a, c in zip(self.coefficients, self.components):
            out += a * c.sample(n, rng)
        return out

    def mean(self):
        return self.a0 + float(sum(a * c.mean() for a, c in zip(self.coefficients, self.components)))

    def variance(self):
        return float(sum(a * a * c.variance() for a, c in zip(self.coefficients, self.components)))
