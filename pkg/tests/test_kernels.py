"""Compiled kernels agree with the pure-Python fallback."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wildfire_psps import _purepy, kernels

try:
    from wildfire_psps import _speedups
except ImportError:  # extension not built
    _speedups = None

needs_ext = pytest.mark.skipif(_speedups is None, reason="compiled extension not built")


def test_backend_name():
    assert kernels.BACKEND in {"cython", "python"}
    if _speedups is not None:
        assert kernels.BACKEND == "cython" or kernels.line_day_metrics is _purepy.line_day_metrics


@needs_ext
@settings(max_examples=300, deadline=None)
@given(*(st.floats(-2, 14, allow_nan=False) for _ in range(4)))
def test_segment_cells_parity(u0, v0, u1, v1):
    a = _purepy.segment_cells(u0, v0, u1, v1, 12, 10)
    b = _speedups.segment_cells(u0, v0, u1, v1, 12, 10)
    np.testing.assert_array_equal(a, b)


@needs_ext
@pytest.mark.parametrize("seed", range(5))
def test_line_metrics_and_moments_parity(seed):
    rng = np.random.default_rng(seed)
    stack = rng.integers(0, 150, size=(7, 9, 11)).astype(float)
    stack[rng.random(stack.shape) < 0.1] = np.nan
    rows = rng.integers(0, 9, size=15).astype(np.int64)
    cols = rng.integers(0, 11, size=15).astype(np.int64)
    ma, ca = _purepy.line_day_metrics(stack, rows, cols, 90.0)
    mb, cb = _speedups.line_day_metrics(stack, rows, cols, 90.0)
    np.testing.assert_array_equal(ca, cb)
    np.testing.assert_allclose(ma, mb, rtol=1e-12)
    pa = _purepy.pixel_moments(stack, rows, cols, 60.0)
    pb = _speedups.pixel_moments(stack, rows, cols, 60.0)
    assert pa[0] == pb[0]
    np.testing.assert_allclose(pa[1:], pb[1:], rtol=1e-12)


@pytest.mark.parametrize("impl", [_purepy, pytest.param(_speedups, marks=needs_ext)])
def test_empty_pixel_set(impl):
    stack = np.ones((3, 2, 2))
    empty = np.zeros(0, dtype=np.int64)
    m, c = impl.line_day_metrics(stack, empty, empty, 1.0)
    assert m.shape == (3, 6) and not m.any() and not c.any()


def test_benchmark_script_runs(capsys):
    import importlib.util
    from pathlib import Path

    from wildfire_psps import kernels

    if kernels.BACKEND != "cython":
        pytest.skip("compiled extension not built")
    path = Path(__file__).resolve().parent.parent / "benchmarks" / "bench_kernels.py"
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    assert mod.main(["--repeat", "1"]) == 0
    assert "speedup" in capsys.readouterr().out
