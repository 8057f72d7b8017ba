"""Shared test helpers: finite-difference oracles."""
import numpy as np


def central_diff(f, arr, idx, eps):
    """Central finite difference of scalar f w.r.t. arr[idx], in place."""
    orig = arr[idx]
    arr[idx] = orig + eps
    hi = f()
    arr[idx] = orig - eps
    lo = f()
    arr[idx] = orig
    return (hi - lo) / (2.0 * eps)


def rel_err(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-12)
