"""Random streams and designs of experiments on the unit cube.

Random designs draw from a caller-supplied ``numpy.random.Generator``;
low-discrepancy sequences are deterministic and start at index 1 so the
origin is never emitted.

Stratified patterns are defined relative to a center ``c`` and a per-axis
scale ``s``; with levels ``l_1 < ... < l_k``:

* axial: ``c``, then ``c +/- l_j s_i e_i`` for every level and axis
  (1 + 2dk points);
* factorial: ``c``, then ``c + l_j s * (+/-1, ..., +/-1)`` for every level
  (1 + k 2^d points);
* composite: the union of both (1 + k 2d + k 2^d points).

The default center is 0.5 and the default scale ``0.5 / max(levels)``, which
puts every pattern inside [0, 1]^d.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import kernels
from .sample import Sample, as_array

__all__ = [
    "make_rng",
    "spawn_rng",
    "DesignSpec",
    "generate",
    "monte_carlo",
    "lhs",
    "halton",
    "faure",
    "sobol",
    "axial",
    "factorial",
    "composite",
    "discrepancy",
    "scale_to_box",
    "sobol_direction_numbers",
    "PRIMES",
    "SOBOL_MAX_DIM",
]

PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97)
SOBOL_MAX_DIM = 21
SOBOL_BITS = 32


def make_rng(seed):
    """PCG64 generator; equal seeds give identical streams."""
    return np.random.Generator(np.random.PCG64(seed))


def spawn_rng(master_seed, stream):
    """Independent sub-stream ``stream`` of ``master_seed``.

    Defined as ``PCG64(SeedSequence([master_seed, stream]))`` so any stream can
    be rebuilt without creating the others.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(master_seed), int(stream)])))


def _labels(d):
    return [f"u{i}" for i in range(d)]


def _check(n, d):
    if int(n) < 1:
        raise ValueError("design size must be >= 1")
    if int(d) < 1:
        raise ValueError("dimension must be >= 1")


# ---------------------------------------------------------------- random


def monte_carlo(n, d, rng):
    _check(n, d)
    return rng.random((int(n), int(d)))


def lhs(n, d, rng):
    """One point per stratum [k/n, (k+1)/n) and axis, jittered uniformly."""
    _check(n, d)
    n, d = int(n), int(d)
    jitter = rng.random((n, d))
    perms = np.column_stack([rng.permutation(n) for _ in range(d)])
    return (perms + jitter) / n


# ---------------------------------------------------------------- low discrepancy


def halton(n, d):
    _check(n, d)
    if d > len(PRIMES):
        raise ValueError(f"Halton limited to {len(PRIMES)} dimensions")
    idx = np.arange(1, int(n) + 1, dtype=np.int64)
    return np.column_stack([kernels.radical_inverse(idx, p) for p in PRIMES[: int(d)]])


def _next_prime(d):
    q = max(2, int(d))
    while any(q % p == 0 for p in range(2, int(math.isqrt(q)) + 1)):
        q += 1
    return q


def faure(n, d):
    """Faure points in base q = smallest prime >= d, indices 1..n."""
    _check(n, d)
    idx = np.arange(1, int(n) + 1, dtype=np.int64)
    return kernels.faure_points(idx, int(d), _next_prime(d))


_SOBOL_TABLE = None


def _sobol_table():
    global _SOBOL_TABLE
    if _SOBOL_TABLE is None:
        text = resources.files("uqkit").joinpath("data/sobol_joe_kuo.json").read_text(encoding="utf-8")
        _SOBOL_TABLE = json.loads(text)
    return _SOBOL_TABLE


def sobol_direction_numbers(d, nbits=SOBOL_BITS):
    """Direction integers V[j, k] = m_{k+1} 2^(nbits-k-1) for the first d axes."""
    if d > SOBOL_MAX_DIM:
        raise ValueError(f"Sobol' table covers d <= {SOBOL_MAX_DIM}, got {d}")
    table = _sobol_table()
    V = np.zeros((d, nbits), dtype=np.uint64)
    for j in range(d):
        poly = table["poly"][j]
        if j == 0:
            m = [1] * nbits
        else:
            s = poly.bit_length() - 1
            m = list(table["m"][j][:s])
            a = [(poly >> (s - i)) & 1 for i in range(1, s)]
            for k in range(s, nbits):
                new = m[k - s] ^ (m[k - s] << s)
                for i in range(1, s):
                    if a[i - 1]:
                        new ^= m[k - i] << i
                m.append(new)
        for k in range(nbits):
            V[j, k] = np.uint64(m[k]) << np.uint64(nbits - k - 1)
    return V


def sobol(n, d):
    """Unscrambled Sobol' points, gray-code order, indices 1..n."""
    _check(n, d)
    if int(n) >= 2**SOBOL_BITS:
        raise ValueError("Sobol' sequence limited to 2^32 - 1 points")
    return kernels.sobol_points(int(n), sobol_direction_numbers(int(d)))


# ---------------------------------------------------------------- stratified


def _pattern_scale(levels, d, center, scale):
    levels = np.asarray(levels, dtype=float).ravel()
    if levels.size == 0:
        raise ValueError("levels list is empty")
    if np.any(levels <= 0):
        raise ValueError("levels must be positive")
    c = np.broadcast_to(np.asarray(0.5 if center is None else center, dtype=float), (d,))
    s = np.broadcast_to(
        np.asarray(0.5 / levels.max() if scale is None else scale, dtype=float), (d,)
    )
    return np.sort(levels), c, s


def _axial_offsets(levels, d):
    out = []
    for lv in levels:
        for i in range(d):
            for sign in (1.0, -1.0):
                e = np.zeros(d)
                e[i] = sign * lv
                out.append(e)
    return out


def _factorial_offsets(levels, d):
    corners = np.array(list(itertools.product((-1.0, 1.0), repeat=d)))
    return [lv * c for lv in levels for c in corners]


def axial(d, levels, center=None, scale=None):
    levels, c, s = _pattern_scale(levels, d, center, scale)
    offs = np.array([np.zeros(d)] + _axial_offsets(levels, d))
    return c + offs * s


def factorial(d, levels, center=None, scale=None):
    levels, c, s = _pattern_scale(levels, d, center, scale)
    offs = np.array([np.zeros(d)] + _factorial_offsets(levels, d))
    return c + offs * s


def composite(d, levels, center=None, scale=None):
    levels, c, s = _pattern_scale(levels, d, center, scale)
    offs = np.array([np.zeros(d)] + _axial_offsets(levels, d) + _factorial_offsets(levels, d))
    return c + offs * s


# ---------------------------------------------------------------- facade


KINDS = ("montecarlo", "lhs", "halton", "faure", "sobol", "factorial", "axial", "composite")


@dataclass
class DesignSpec:
    kind: str
    dimension: int
    n: int | None = None
    levels: list = field(default_factory=list)
    center: object = None
    scale: object = None

    def __post_init__(self):
        self.kind = self.kind.lower().replace("_", "").replace("-", "")
        if self.kind not in KINDS:
            raise ValueError(f"unknown design kind {self.kind!r}; supported: {', '.join(KINDS)}")

    @property
    def random(self):
        return self.kind in ("montecarlo", "lhs")

    @property
    def stratified(self):
        return self.kind in ("factorial", "axial", "composite")


def generate(spec: DesignSpec, rng=None) -> Sample:
    d = spec.dimension
    if spec.kind == "montecarlo":
        pts = monte_carlo(spec.n, d, _need(rng))
    elif spec.kind == "lhs":
        pts = lhs(spec.n, d, _need(rng))
    elif spec.kind == "halton":
        pts = halton(spec.n, d)
    elif spec.kind == "faure":
        pts = faure(spec.n, d)
    elif spec.kind == "sobol":
        pts = sobol(spec.n, d)
    else:
        pts = {"factorial": factorial, "axial": axial, "composite": composite}[spec.kind](
            d, spec.levels, spec.center, spec.scale
        )
    return Sample(pts, _labels(d))


def _need(rng):
    if rng is None:
        raise ValueError("random designs need a generator")
    return rng


def discrepancy(sample):
    """L2 star discrepancy (Warnock's closed form) of points in [0, 1]^d."""
    x = as_array(sample)
    if x.shape[0] == 0:
        raise ValueError("discrepancy of an empty sample")
    if np.any(x < 0) or np.any(x > 1):
        raise ValueError("points must lie in the unit cube")
    return kernels.l2_star_discrepancy(x)


def scale_to_box(points, lower, upper):
    """Affine map of unit-cube points onto [lower, upper]."""
    x = as_array(points)
    lo, hi = np.asarray(lower, dtype=float), np.asarray(upper, dtype=float)
    return lo + x * (hi - lo)
