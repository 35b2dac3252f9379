"""numba loops and numpy fallbacks must agree; the env flag picks one."""
import os
import subprocess
import sys

import numpy as np
import pytest
from scipy.stats import kstwo

from uqkit import kernels
from uqkit.designs import sobol_direction_numbers


def test_radical_inverse_variants_agree():
    idx = np.arange(0, 5000, dtype=np.int64)
    for base in (2, 3, 7, 23):
        np.testing.assert_array_equal(kernels.radical_inverse_loops(idx, base), kernels.radical_inverse_numpy(idx, base))


def test_radical_inverse_known_values():
    np.testing.assert_allclose(kernels.radical_inverse(np.arange(1, 8), 2), [0.5, 0.25, 0.75, 0.125, 0.625, 0.375, 0.875])
    np.testing.assert_allclose(kernels.radical_inverse(np.arange(1, 5), 3), [1 / 3, 2 / 3, 1 / 9, 4 / 9])


def test_faure_variants_agree():
    idx = np.arange(1, 3000, dtype=np.int64)
    base = 5
    nd = kernels._n_digits(int(idx.max()), base)
    pascal = np.stack([kernels._pascal_power_mod(nd, j, base) for j in range(5)])
    np.testing.assert_allclose(kernels.faure_loops(idx, 5, base, pascal), kernels.faure_numpy(idx, 5, base, pascal), rtol=0, atol=1e-15)


def test_sobol_variants_agree():
    V = sobol_direction_numbers(10)
    np.testing.assert_array_equal(kernels.sobol_loops(4096, V), kernels.sobol_numpy(4096, V))


def test_discrepancy_variants_agree(rng):
    x = rng.random((700, 3))
    assert kernels.l2_star_discrepancy_loops(x) == pytest.approx(kernels.l2_star_discrepancy_numpy(x), rel=1e-12)


@pytest.mark.parametrize("n,d", [(5, 0.3), (10, 0.274), (40, 0.1), (100, 0.05)])
def test_ks_variants_agree_and_match_scipy(n, d):
    a, b = kernels.ks_cdf_loops(n, d), kernels.ks_cdf_numpy(n, d)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-15)
    assert a == pytest.approx(kstwo.cdf(d, n), rel=1e-9, abs=1e-12)


def test_kde_sum_variants_agree(rng):
    data = rng.standard_normal(300)
    pts = np.linspace(-3, 3, 101)
    np.testing.assert_allclose(kernels.gaussian_kernel_sum_loops(pts, data, 0.4),
                               kernels.gaussian_kernel_sum_numpy(pts, data, 0.4), rtol=1e-12)


def _enabled_under(flag):
    env = dict(os.environ, UQKIT_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", "from uqkit._numba import ENABLED; print(ENABLED)"],
                         env=env, capture_output=True, text=True, check=True)
    return out.stdout.strip()


def test_env_flag_selects_backend():
    assert _enabled_under("0") == "False"
    assert _enabled_under("1") == "True"


def test_numpy_backend_gives_same_designs():
    code = ("import numpy as np; from uqkit.designs import halton, sobol, discrepancy; "
            "x = np.vstack([halton(64, 3), sobol(64, 3)]); print(repr(x.sum()), repr(discrepancy(halton(64, 3))))")
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, UQKIT_NUMBA=flag)
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout.split())
    assert outs[0][0] == outs[1][0]
    assert float(outs[0][1]) == pytest.approx(float(outs[1][1]), rel=1e-12)
