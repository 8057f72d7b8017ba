"""Pure-numpy conv kernels: im2col + BLAS matmul.

Fallback backend behind :mod:`chatbrush.nn.kernels`. Layouts are NCHW for
activations and (Cout, Cin, KH, KW) for weights, with symmetric zero padding.
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def _pad_input(x, pad):
    if pad == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))


def _im2col(xp, kh, kw, stride):
    # (N, C, Hp, Wp) -> contiguous (N, Ho, Wo, C, KH, KW)
    win = sliding_window_view(xp, (kh, kw), axis=(2, 3))
    win = win[:, :, ::stride, ::stride]
    return np.ascontiguousarray(win.transpose(0, 2, 3, 1, 4, 5))


def out_size(h, k, stride, pad):
    return (h + 2 * pad - k) // stride + 1


def conv2d_forward(x, w, stride=1, pad=0):
    n, cin, h, wd = x.shape
    cout, cin_w, kh, kw = w.shape
    if cin != cin_w:
        raise ValueError(f"channel mismatch: input {cin}, weight {cin_w}")
    cols = _im2col(_pad_input(x, pad), kh, kw, stride)
    ho, wo = cols.shape[1], cols.shape[2]
    y = cols.reshape(n * ho * wo, cin * kh * kw) @ w.reshape(cout, -1).T
    return np.ascontiguousarray(y.reshape(n, ho, wo, cout).transpose(0, 3, 1, 2))


def conv2d_grad_input(gy, w, x_shape, stride=1, pad=0):
    n, cin, h, wd = x_shape
    cout, _, kh, kw = w.shape
    _, _, ho, wo = gy.shape
    gy_mat = gy.transpose(0, 2, 3, 1).reshape(n * ho * wo, cout)
    gcols = gy_mat @ w.reshape(cout, -1)
    gcols = gcols.reshape(n, ho, wo, cin, kh, kw)
    hp, wp = h + 2 * pad, wd + 2 * pad
    gxp = np.zeros((n, cin, hp, wp), dtype=gy.dtype)
    for ky in range(kh):
        for kx in range(kw):
            gxp[:, :, ky:ky + stride * ho:stride, kx:kx + stride * wo:stride] += (
                gcols[:, :, :, :, ky, kx].transpose(0, 3, 1, 2)
            )
    if pad == 0:
        return gxp
    return np.ascontiguousarray(gxp[:, :, pad:pad + h, pad:pad + wd])


def conv2d_grad_weight(gy, x, w_shape, stride=1, pad=0):
    cout, cin, kh, kw = w_shape
    n = x.shape[0]
    _, _, ho, wo = gy.shape
    cols = _im2col(_pad_input(x, pad), kh, kw, stride)
    gy_mat = gy.transpose(1, 0, 2, 3).reshape(cout, n * ho * wo)
    gw = gy_mat @ cols.reshape(n * ho * wo, cin * kh * kw)
    return gw.reshape(cout, cin, kh, kw)
