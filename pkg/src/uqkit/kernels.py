"""Hot numeric kernels.

Every kernel exists twice: a scalar-loop version compiled with numba
(``*_loops``) and a vectorised numpy version (``*_numpy``).  The public name
dispatches on :data:`uqkit._numba.ENABLED`, which follows the ``UQKIT_NUMBA``
environment variable.  Both versions return identical results up to
floating-point summation order.
"""
import math

import numpy as np

from ._numba import ENABLED, njit

__all__ = [
    "radical_inverse",
    "faure_points",
    "sobol_points",
    "l2_star_discrepancy",
    "ks_cdf",
    "gaussian_kernel_sum",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------- radical inverse


@njit
def radical_inverse_loops(indices, base):
    out = np.empty(indices.shape[0])
    for i in range(indices.shape[0]):
        k = indices[i]
        f = 1.0 / base
        r = 0.0
        while k > 0:
            r += (k % base) * f
            k //= base
            f /= base
        out[i] = r
    return out


def radical_inverse_numpy(indices, base):
    k = np.array(indices, dtype=np.int64, copy=True)
    out = np.zeros(k.shape[0])
    f = 1.0 / base
    while np.any(k > 0):
        out += (k % base) * f
        k //= base
        f /= base
    return out


# ---------------------------------------------------------------- Faure


def _pascal_power_mod(n_digits, power, base):
    """Upper-triangular matrix C(m, i) * power**(m - i) reduced mod base."""
    P = np.zeros((n_digits, n_digits), dtype=np.int64)
    for i in range(n_digits):
        for m in range(i, n_digits):
            P[i, m] = (math.comb(m, i) % base) * pow(power, m - i, base) % base
    return P


def _n_digits(n_max, base):
    nd = 1
    while base**nd <= n_max:
        nd += 1
    return nd


@njit
def faure_loops(indices, dim, base, pascal):
    n = indices.shape[0]
    nd = pascal.shape[1]
    out = np.empty((n, dim))
    digits = np.zeros(nd, dtype=np.int64)
    for r in range(n):
        k = indices[r]
        for i in range(nd):
            digits[i] = k % base
            k //= base
        for j in range(dim):
            val = 0.0
            f = 1.0 / base
            for i in range(nd):
                c = 0
                for m in range(i, nd):
                    c += pascal[j, i, m] * digits[m]
                val += (c % base) * f
                f /= base
            out[r, j] = val
    return out


def faure_numpy(indices, dim, base, pascal):
    indices = np.asarray(indices, dtype=np.int64)
    nd = pascal.shape[1]
    powers = base ** np.arange(nd, dtype=np.int64)
    digits = (indices[:, None] // powers[None, :]) % base
    weights = 1.0 / (base * powers.astype(float))
    out = np.empty((indices.shape[0], dim))
    for j in range(dim):
        c = (digits @ pascal[j].T) % base
        out[:, j] = c @ weights
    return out


# ---------------------------------------------------------------- Sobol'


@njit
def sobol_loops(n, V):
    d, nbits = V.shape
    out = np.empty((n, d))
    x = np.zeros(d, dtype=np.uint64)
    scale = 1.0 / float(2**nbits)
    for k in range(1, n + 1):
        # lowest zero bit of k - 1
        c = 0
        v = k - 1
        while v & 1:
            v >>= 1
            c += 1
        for j in range(d):
            x[j] ^= V[j, c]
            out[k - 1, j] = float(x[j]) * scale
    return out


def sobol_numpy(n, V):
    d, nbits = V.shape
    k = np.arange(1, n + 1, dtype=np.uint64)
    gray = k ^ (k >> np.uint64(1))
    x = np.zeros((n, d), dtype=np.uint64)
    for b in range(nbits):
        mask = ((gray >> np.uint64(b)) & np.uint64(1)).astype(bool)
        if not mask.any():
            break
        x[mask] ^= V[:, b]
    return x.astype(float) / float(2**nbits)


# ---------------------------------------------------------------- discrepancy


@njit
def l2_star_discrepancy_loops(x):
    n, d = x.shape
    s1 = 0.0
    for i in range(n):
        p = 1.0
        for k in range(d):
            p *= 1.0 - x[i, k] ** 2
        s1 += p
    s2 = 0.0
    for i in range(n):
        for j in range(n):
            p = 1.0
            for k in range(d):
                p *= 1.0 - max(x[i, k], x[j, k])
            s2 += p
    val = 3.0 ** (-d) - 2.0 ** (1 - d) / n * s1 + s2 / (n * n)
    return math.sqrt(max(val, 0.0))


def l2_star_discrepancy_numpy(x, chunk=512):
    x = np.asarray(x, dtype=float)
    n, d = x.shape
    s1 = np.prod(1.0 - x**2, axis=1).sum()
    s2 = 0.0
    for start in range(0, n, chunk):
        block = x[start:start + chunk]
        s2 += np.prod(1.0 - np.maximum(block[:, None, :], x[None, :, :]), axis=2).sum()
    val = 3.0 ** (-d) - 2.0 ** (1 - d) / n * s1 + s2 / (n * n)
    return math.sqrt(max(val, 0.0))


# ---------------------------------------------------------------- Kolmogorov


def _ks_matrix(n, d):
    k = int(n * d) + 1
    m = 2 * k - 1
    h = k - n * d
    H = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            if i - j + 1 >= 0:
                H[i, j] = 1.0
    for i in range(m):
        H[i, 0] -= h ** (i + 1)
        H[m - 1, i] -= h ** (m - i)
    if 2 * h - 1 > 0:
        H[m - 1, 0] += (2 * h - 1) ** m
    for i in range(m):
        for j in range(m):
            if i - j + 1 > 0:
                H[i, j] *= math.exp(-math.lgamma(i - j + 2))
    return H, k


@njit
def _matmul_loops(A, B):
    m = A.shape[0]
    C = np.zeros((m, m))
    for i in range(m):
        for l in range(m):
            a = A[i, l]
            if a != 0.0:
                for j in range(m):
                    C[i, j] += a * B[l, j]
    return C


@njit
def _ks_power_loops(H, n):
    # binary exponentiation tracking a base-10 exponent to avoid overflow
    m = H.shape[0]
    V = np.eye(m)
    eV = 0
    A = H.copy()
    eA = 0
    nn = n
    while nn > 0:
        if nn & 1:
            V = _matmul_loops(V, A)
            eV += eA
            if V[m // 2, m // 2] > 1e140:
                V *= 1e-140
                eV += 140
        nn >>= 1
        if nn > 0:
            A = _matmul_loops(A, A)
            eA *= 2
            if A[m // 2, m // 2] > 1e140:
                A *= 1e-140
                eA += 140
    return V, eV


def _ks_power_numpy(H, n):
    m = H.shape[0]
    V = np.eye(m)
    eV = 0
    A = H.copy()
    eA = 0
    while n > 0:
        if n & 1:
            V = V @ A
            eV += eA
            if V[m // 2, m // 2] > 1e140:
                V *= 1e-140
                eV += 140
        n >>= 1
        if n > 0:
            A = A @ A
            eA *= 2
            if A[m // 2, m // 2] > 1e140:
                A *= 1e-140
                eA += 140
    return V, eV


def _ks_finish(V, eV, k, n):
    s = V[k - 1, k - 1]
    for i in range(1, n + 1):
        s = s * i / n
        if s < 1e-140:
            s *= 1e140
            eV -= 140
    return min(max(s * 10.0**eV, 0.0), 1.0)


def ks_cdf_loops(n, d):
    if d >= 1.0:
        return 1.0
    if d <= 0.5 / n:
        return 0.0
    H, k = _ks_matrix(n, d)
    V, eV = _ks_power_loops(H, n)
    return _ks_finish(V, eV, k, n)


def ks_cdf_numpy(n, d):
    if d >= 1.0:
        return 1.0
    if d <= 0.5 / n:
        return 0.0
    H, k = _ks_matrix(n, d)
    V, eV = _ks_power_numpy(H, n)
    return _ks_finish(V, eV, k, n)


# ---------------------------------------------------------------- KDE sums


@njit
def gaussian_kernel_sum_loops(points, data, h):
    out = np.empty(points.shape[0])
    c = 1.0 / math.sqrt(2.0 * math.pi)
    for i in range(points.shape[0]):
        s = 0.0
        for j in range(data.shape[0]):
            z = (points[i] - data[j]) / h
            s += math.exp(-0.5 * z * z)
        out[i] = s * c / h
    return out


def gaussian_kernel_sum_numpy(points, data, h, chunk=2_000_000):
    points = np.asarray(points, dtype=float)
    data = np.asarray(data, dtype=float)
    out = np.empty(points.shape[0])
    step = max(1, chunk // max(1, data.shape[0]))
    for s in range(0, points.shape[0], step):
        z = (points[s:s + step, None] - data[None, :]) / h
        out[s:s + step] = np.exp(-0.5 * z * z).sum(axis=1)
    return out * _INV_SQRT_2PI / h


# ---------------------------------------------------------------- dispatch


def radical_inverse(indices, base):
    """Van der Corput radical inverse of non-negative integers in ``base``."""
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    if ENABLED:
        return radical_inverse_loops(indices, int(base))
    return radical_inverse_numpy(indices, int(base))


def faure_points(indices, dim, base):
    """Faure points for the given integer indices (rows) in ``dim`` dimensions."""
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    n_max = int(indices.max()) if indices.size else 0
    nd = _n_digits(n_max, base)
    pascal = np.stack([_pascal_power_mod(nd, j, base) for j in range(dim)])
    if ENABLED:
        return faure_loops(indices, dim, int(base), pascal)
    return faure_numpy(indices, dim, base, pascal)


def sobol_points(n, V):
    """First ``n`` Sobol' points (index 1..n) from direction integers ``V``."""
    V = np.ascontiguousarray(V, dtype=np.uint64)
    if ENABLED:
        return sobol_loops(int(n), V)
    return sobol_numpy(int(n), V)


def l2_star_discrepancy(x):
    x = np.ascontiguousarray(x, dtype=float)
    if ENABLED:
        return l2_star_discrepancy_loops(x)
    return l2_star_discrepancy_numpy(x)


KS_MAX_ORDER = 1001


def ks_cdf(n, d):
    """P(D_n < d) for the two-sided Kolmogorov statistic.

    Exact matrix power for m = 2 ceil(n d) - 1 <= KS_MAX_ORDER.  In the far
    right tail (n d^2 > 7.24, or > 3.76 with n > 99) Marsaglia-Tsang-Wang's
    own closed-form approximation is used, accurate to about 7 digits of
    the p-value; beyond KS_MAX_ORDER scipy's exact ``kstwo`` takes over.
    """
    n = int(n)
    d = float(d)
    if d >= 1.0:
        return 1.0
    if d <= 0.5 / n:
        return 0.0
    s = d * d * n
    if s > 7.24 or (s > 3.76 and n > 99):
        return 1.0 - 2.0 * math.exp(-(2.000071 + 0.331 / math.sqrt(n) + 1.409 / n) * s)
    if 2 * (int(n * d) + 1) - 1 > KS_MAX_ORDER:
        from scipy.stats import kstwo

        return float(kstwo.cdf(d, n))
    # manual loops lose to BLAS once the matrix grows
    if ENABLED and 2 * (int(n * d) + 1) - 1 <= 80:
        return ks_cdf_loops(n, d)
    return ks_cdf_numpy(n, d)


def gaussian_kernel_sum(points, data, h):
    """``mean_j phi((x - x_j) / h) / h`` evaluated at every point."""
    points = np.ascontiguousarray(points, dtype=float)
    data = np.ascontiguousarray(data, dtype=float)
    if ENABLED:
        return gaussian_kernel_sum_loops(points, data, float(h)) / data.shape[0]
    return gaussian_kernel_sum_numpy(points, data, float(h)) / data.shape[0]
