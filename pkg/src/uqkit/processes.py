"""Minimal stochastic processes on a one-dimensional mesh."""
from __future__ import annotations

import numpy as np

from .sample import Sample

__all__ = [
    "Mesh",
    "Field",
    "white_noise",
    "random_walk",
    "functional_basis_process",
    "apply_field_transform",
    "add_trend",
    "remove_trend",
]


class Mesh:
    """Strictly increasing vertices t_0 < t_1 < ... (a time grid)."""

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=float).ravel()
        if v.size == 0:
            raise ValueError("a mesh needs at least one vertex")
        if np.any(np.diff(v) <= 0):
            raise ValueError("mesh vertices must be strictly increasing")
        self.vertices = v

    @classmethod
    def regular(cls, start, step, count):
        return cls(start + step * np.arange(int(count)))

    def __len__(self):
        return self.vertices.size

    def __eq__(self, other):
        return isinstance(other, Mesh) and np.array_equal(self.vertices, other.vertices)

    def __repr__(self):
        return f"Mesh(n={len(self)}, [{self.vertices[0]}, {self.vertices[-1]}])"


class Field:
    """One value in R^d per mesh vertex."""

    def __init__(self, mesh: Mesh, values):
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.shape[0] != len(mesh):
            raise ValueError(f"{values.shape[0]} values for {len(mesh)} vertices")
        self.mesh = mesh
        self.values = values

    @property
    def dimension(self):
        return self.values.shape[1]

    def _same_mesh(self, other):
        if not isinstance(other, Field) or other.mesh != self.mesh:
            raise ValueError("fields live on different meshes")

    def __add__(self, other):
        self._same_mesh(other)
        return Field(self.mesh, self.values + other.values)

    def __sub__(self, other):
        self._same_mesh(other)
        return Field(self.mesh, self.values - other.values)

    def __eq__(self, other):
        return isinstance(other, Field) and other.mesh == self.mesh and np.array_equal(other.values, self.values)

    def to_csv(self, path=None, labels=None):
        labels = labels or [f"x{i}" for i in range(self.dimension)]
        return Sample(np.column_stack([self.mesh.vertices, self.values]), ["t"] + list(labels)).to_csv(path)


def _draw(dist, n, rng):
    """n draws from a univariate law (n,) or a joint law (n, d)."""
    x = np.asarray(dist.sample(n, rng), dtype=float)
    return x.reshape(n, -1)


def white_noise(dist, mesh: Mesh, rng) -> Field:
    return Field(mesh, _draw(dist, len(mesh), rng))


def random_walk(origin, step_dist, mesh: Mesh, rng) -> Field:
    """X(t_0) = origin, X(t_k) = X(t_{k-1}) + step_k."""
    origin = np.atleast_1d(np.asarray(origin, dtype=float))
    steps = _draw(step_dist, len(mesh) - 1, rng)
    if steps.shape[1] != origin.size:
        raise ValueError("origin and step law dimensions differ")
    values = np.vstack([origin, origin + np.cumsum(steps, axis=0)])
    return Field(mesh, values)


def functional_basis_process(coefficient_law, basis, mesh: Mesh, rng) -> Field:
    """X(t) = sum_i A_i phi_i(t) with A drawn once from ``coefficient_law``.

    ``coefficient_law`` may also be a fixed coefficient vector.
    """
    if hasattr(coefficient_law, "sample"):
        a = np.asarray(coefficient_law.sample(1, rng), dtype=float).ravel()
    else:
        a = np.asarray(coefficient_law, dtype=float).ravel()
    if a.size != len(basis):
        raise ValueError(f"{a.size} coefficients for {len(basis)} basis functions")
    t = mesh.vertices
    phi = np.column_stack([np.broadcast_to(np.asarray(f(t), dtype=float), t.shape) for f in basis])
    return Field(mesh, phi @ a)


def apply_field_transform(f, field: Field) -> Field:
    """Vertexwise map ``f(t, x) -> x'`` (x of shape (n, d))."""
    return Field(field.mesh, np.asarray(f(field.mesh.vertices, field.values), dtype=float).reshape(len(field.mesh), -1))


def add_trend(field: Field, trend) -> Field:
    return apply_field_transform(lambda t, x: x + np.asarray(trend(t), dtype=float).reshape(len(t), -1), field)


def remove_trend(field: Field, trend) -> Field:
    return apply_field_transform(lambda t, x: x - np.asarray(trend(t), dtype=float).reshape(len(t), -1), field)
