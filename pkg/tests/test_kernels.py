import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from labelstop import kernels

needs_compiled = pytest.mark.skipif(kernels.compiled_best_stump is None, reason="compiled extension not built")


def case(seed, integer=False):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 60))
    d = int(rng.integers(1, 5))
    X = rng.integers(0, 4, size=(n, d)).astype(float) if integer else rng.normal(size=(n, d))
    y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    w = rng.random(n)
    w /= w.sum()
    return X, np.argsort(X, axis=0, kind="stable"), y, w


@needs_compiled
@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_backends_bit_identical(seed, integer):
    X, order, y, w = case(seed, integer)
    assert kernels.compiled_best_stump(X, order, y, w) == kernels.python_best_stump(X, order, y, w)


def test_no_split_on_constant_features():
    X = np.ones((5, 2))
    order = np.argsort(X, axis=0, kind="stable")
    y = np.array([1.0, -1.0, 1.0, -1.0, 1.0])
    w = np.full(5, 0.2)
    assert kernels.python_best_stump(X, order, y, w)[0] == -1
    if kernels.compiled_best_stump is not None:
        assert kernels.compiled_best_stump(X, order, y, w)[0] == -1


def test_env_var_forces_python():
    env = dict(os.environ, LABELSTOP_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from labelstop import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


def test_python_kernel_reports_weighted_error():
    X = np.array([[0.0], [1.0], [2.0]])
    order = np.argsort(X, axis=0, kind="stable")
    y = np.array([-1.0, 1.0, -1.0])
    w = np.array([0.2, 0.5, 0.3])
    f, thr, pol, err = kernels.python_best_stump(X, order, y, w)
    # x < 1.5 -> +1 misclassifies only the first (lightest) point
    assert (f, thr, pol) == (0, 1.5, -1) and err == pytest.approx(0.2)
