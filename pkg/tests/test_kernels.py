import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from vortexpairs import _pykernels, kernels

try:
    from vortexpairs import _ckernels
except ImportError:  # extension not built
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled extension not built")


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")
    if _ckernels is not None and os.environ.get("VORTEXPAIRS_PURE_PYTHON") != "1":
        assert kernels.BACKEND == "cython"


def test_env_var_forces_python_backend():
    code = "import vortexpairs; print(vortexpairs.BACKEND)"
    env = dict(os.environ, VORTEXPAIRS_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_ext
def test_bessel_backends_agree():
    x = np.concatenate([np.geomspace(1e-6, 800, 5000), [2.0, 2.0 - 1e-15, 745.0]])
    a0, a1 = _pykernels.k0k1_array(x)
    b0, b1 = _ckernels.k0k1_array(x)
    nz = a0 > 0
    assert np.max(np.abs(a0[nz] / b0[nz] - 1)) <= 1e-15
    assert np.max(np.abs(a1[nz] / b1[nz] - 1)) <= 1e-15
    assert np.array_equal(a0 == 0, b0 == 0)


def _source(mod, coef, ell, v):
    out, dout = np.empty_like(v), np.empty_like(v)
    mod.tanh_source(coef, ell, v, out, dout)
    return out, dout


@needs_ext
@given(arrays(np.float64, 50, elements=st.floats(-60, 60)),
       arrays(np.float64, 50, elements=st.floats(-60, 60)))
@settings(max_examples=100, deadline=None)
def test_source_backends_agree(ell, v):
    coef = np.full(50, 0.7)
    a, da = _source(_pykernels, coef, ell, v)
    b, db = _source(_ckernels, coef, ell, v)
    assert np.allclose(a, b, rtol=1e-15, atol=1e-300)
    assert np.allclose(da, db, rtol=1e-14, atol=1e-300)


@pytest.mark.parametrize("mod", [_pykernels] + ([_ckernels] if _ckernels else []))
def test_source_is_tanh_and_its_derivative(mod):
    v = np.linspace(-30, 30, 601)
    ell = np.full_like(v, 0.4)
    coef = np.full_like(v, 2.0)
    out, dout = _source(mod, coef, ell, v)
    a = 0.5 * (v + ell)
    assert np.allclose(out, 2.0 * np.tanh(a), rtol=1e-15, atol=1e-15)
    # d/dv of 2 tanh((v + ell)/2) is sech^2
    assert np.allclose(dout, 1.0 / np.cosh(a) ** 2, rtol=1e-13, atol=1e-300)


@pytest.mark.parametrize("mod", [_pykernels] + ([_ckernels] if _ckernels else []))
def test_source_saturates_at_log_singularity(mod):
    # ell = -inf at a vortex node: tanh -> -1, derivative -> 0, no NaN
    v = np.array([0.3, -2.0])
    ell = np.array([-np.inf, np.inf])
    out, dout = _source(mod, np.ones(2), ell, v)
    assert out.tolist() == [-1.0, 1.0] and dout.tolist() == [0.0, 0.0]


def test_benchmark_script_runs():
    root = os.path.dirname(os.path.dirname(__file__))
    script = os.path.join(root, "benchmarks", "bench_kernels.py")
    out = subprocess.run([sys.executable, script, "--n", "20000", "--repeat", "2"],
                         capture_output=True, text=True, check=True).stdout
    assert "python" in out
    if _ckernels is not None:
        assert "speed-up" in out and "max rel diff" in out
