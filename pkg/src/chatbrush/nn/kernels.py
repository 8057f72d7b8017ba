"""Kernel backend dispatch.

Two interchangeable conv backends: compiled Cython direct convolution
(:mod:`chatbrush.nn._kernels_cy`) and pure-numpy im2col + BLAS matmul
(:mod:`chatbrush.nn.kernels_numpy`). Selection happens at import:

* ``CHATBRUSH_KERNELS=cython`` or ``=numpy`` forces one backend;
* ``auto`` (default) uses the compiled kernels when built, except for wide
  reductions (Cin*KH*KW >= 512) where BLAS wins on measured throughput —
  see ``benchmarks/bench_kernels.py`` for the numbers behind the cutoff.

Both backends are cross-checked against each other in the test suite.
"""
import os

from . import kernels_numpy

try:
    from . import _kernels_cy
except ImportError:  # extension not built; numpy path keeps the package usable
    _kernels_cy = None

_WIDE_REDUCTION = 512  # Cin*KH*KW at which im2col+BLAS overtakes the direct kernel

_CHOICE = os.environ.get("CHATBRUSH_KERNELS", "auto").lower()
if _CHOICE not in ("auto", "cython", "numpy"):
    raise ValueError(f"CHATBRUSH_KERNELS must be auto|cython|numpy, got {_CHOICE!r}")
if _CHOICE == "cython" and _kernels_cy is None:
    raise ImportError("CHATBRUSH_KERNELS=cython but the compiled extension is unavailable")
if _CHOICE == "auto" and _kernels_cy is None:
    _CHOICE = "numpy"

BACKEND = _CHOICE


def backend_name():
    return BACKEND


def _impl(cin, kh, kw):
    if BACKEND == "numpy":
        return kernels_numpy
    if BACKEND == "cython":
        return _kernels_cy
    if cin * kh * kw >= _WIDE_REDUCTION:
        return kernels_numpy
    return _kernels_cy


def conv2d_forward(x, w, stride=1, pad=0):
    return _impl(w.shape[1], w.shape[2], w.shape[3]).conv2d_forward(x, w, stride, pad)


def conv2d_grad_input(gy, w, x_shape, stride=1, pad=0):
    return _impl(w.shape[1], w.shape[2], w.shape[3]).conv2d_grad_input(gy, w, x_shape, stride, pad)


def conv2d_grad_weight(gy, x, w_shape, stride=1, pad=0):
    return _impl(w_shape[1], w_shape[2], w_shape[3]).conv2d_grad_weight(gy, x, w_shape, stride, pad)


def out_size(h, k, stride, pad):
    return (h + 2 * pad - k) // stride + 1
