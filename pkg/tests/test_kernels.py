"""The compiled core and the pure-Python fallback must agree bit for bit."""
import os
import subprocess
import sys

import numpy as np
import pytest

from nonstat_aos import _purepy, kernels
from nonstat_aos.roster import DEFAULT_PARAMS, make_policy

CY = kernels.backends().get("cython")
needs_core = pytest.mark.skipif(CY is None, reason="compiled core not built")
KERNEL_POLICIES = [n for n in DEFAULT_PARAMS if n != "IM"]


@needs_core
@pytest.mark.parametrize("name", KERNEL_POLICIES)
@pytest.mark.parametrize("n1,wsize", [(1, 1), (3, 2), (8, 8), (2, 5)])
def test_single_trajectory_parity(name, n1, wsize):
    pol = make_policy(name)
    draws = np.random.default_rng(n1 * 31 + wsize).random(2 * 400)
    a = _purepy.run_binary(pol.kernel_code, pol.kernel_params(), 8, n1, wsize, 400, draws)
    b = CY.run_binary(pol.kernel_code, pol.kernel_params(), 8, n1, wsize, 400, draws)
    assert np.array_equal(a[0], b[0])
    assert np.array_equal(a[1], b[1])
    assert a[2] == b[2]


@needs_core
@pytest.mark.parametrize("params", [
    dict(name="DMAB", gamma=0.5, delta=0.01),
    dict(name="ARW", p_min=0.0, alpha=0.9, utility="mean"),
    dict(name="AP", p_min=0.125, beta=1.0, alpha=0.1),
    dict(name="EGR", eps=1.0, alpha=0.3),
])
def test_parity_off_default_parameters(params):
    params = dict(params)
    pol = make_policy(params.pop("name"), **params)
    draws = np.random.default_rng(7).random((6, 2 * 300))
    a = _purepy.run_binary_totals(pol.kernel_code, pol.kernel_params(), 8, 3, 3, 300, draws)
    b = CY.run_binary_totals(pol.kernel_code, pol.kernel_params(), 8, 3, 3, 300, draws)
    assert np.array_equal(a, b)


@needs_core
@pytest.mark.parametrize("credit_mean", [False, True])
def test_island_parity(credit_mean):
    draws = np.random.default_rng(3).random((120, 24))
    a = _purepy.run_island(8, 3, 2, 120, 24, 0.2, 0.05, credit_mean, draws)
    b = CY.run_island(8, 3, 2, 120, 24, 0.2, 0.05, credit_mean, draws)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


@needs_core
@pytest.mark.parametrize("n1,wsize,sc,zero", [(1, 3, 9, True), (2, 2, 7, True),
                                              (3, 5, 6, False), (1, 8, 1, True)])
def test_solver_parity(n1, wsize, sc, zero):
    assert _purepy.circular_best(n1, wsize, sc, zero) == CY.circular_best(n1, wsize, sc, zero)


@needs_core
def test_compiled_input_validation():
    pol = make_policy("GR")
    with pytest.raises(ValueError):
        CY.run_binary(pol.kernel_code, pol.kernel_params(), 8, 9, 1, 10, np.zeros(20))
    with pytest.raises(ValueError):
        CY.run_binary(pol.kernel_code, pol.kernel_params(), 8, 1, 1, 10, np.zeros(5))
    with pytest.raises(ValueError):
        CY.run_binary(99, pol.kernel_params(), 8, 1, 1, 10, np.zeros(20))


def test_zero_horizon():
    pol = make_policy("U")
    for mod in kernels.backends().values():
        ops, gains, restarts = mod.run_binary(pol.kernel_code, pol.kernel_params(), 8, 1, 1, 0,
                                              np.zeros(0))
        assert len(ops) == len(gains) == 0 and restarts == 0


def test_env_forces_python_backend():
    env = dict(os.environ, NONSTAT_AOS_BACKEND="python")
    out = subprocess.run([sys.executable, "-c",
                          "from nonstat_aos import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_default_backend_prefers_core():
    assert kernels.BACKEND == ("cython" if CY is not None else "python")
