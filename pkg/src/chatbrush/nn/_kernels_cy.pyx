# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled conv kernels: direct convolution over pre-padded buffers with
OpenMP across independent output slabs. Each output element is accumulated by
exactly one thread in a fixed order, so results are reproducible run to run.
"""
import numpy as np

cimport cython
cimport numpy as cnp
from cython.parallel cimport prange

ctypedef fused real:
    float
    double


def _padded(x, Py_ssize_t pad):
    if pad == 0:
        return np.ascontiguousarray(x)
    return np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))


def conv2d_forward(x, w, int stride=1, int pad=0):
    if x.shape[1] != w.shape[1]:
        raise ValueError("channel mismatch between input and weight")
    xp = _padded(x, pad)
    return _forward(xp, np.ascontiguousarray(w), stride,
                    (x.shape[2] + 2 * pad - w.shape[2]) // stride + 1,
                    (x.shape[3] + 2 * pad - w.shape[3]) // stride + 1)


def _forward(real[:, :, :, ::1] xp, real[:, :, :, ::1] w, int stride, Py_ssize_t ho, Py_ssize_t wo):
    cdef Py_ssize_t n = xp.shape[0], cin = xp.shape[1]
    cdef Py_ssize_t cout = w.shape[0], kh = w.shape[2], kw = w.shape[3]
    ynp = np.zeros((n, cout, ho, wo), dtype=np.asarray(xp).dtype)
    cdef real[:, :, :, ::1] y = ynp
    cdef Py_ssize_t slab, i, co, ci, ky, kx, oy, ox, iy
    cdef real wv

    for slab in prange(n * cout, nogil=True, schedule='static'):
        i = slab // cout
        co = slab % cout
        for ci in range(cin):
            for ky in range(kh):
                for kx in range(kw):
                    wv = w[co, ci, ky, kx]
                    if stride == 1:
                        for oy in range(ho):
                            iy = oy + ky
                            for ox in range(wo):
                                y[i, co, oy, ox] += wv * xp[i, ci, iy, ox + kx]
                    else:
                        for oy in range(ho):
                            iy = stride * oy + ky
                            for ox in range(wo):
                                y[i, co, oy, ox] += wv * xp[i, ci, iy, stride * ox + kx]
    return ynp


def conv2d_grad_input(gy, w, x_shape, int stride=1, int pad=0):
    cdef Py_ssize_t h = x_shape[2], wd = x_shape[3]
    gxp = _grad_input(np.ascontiguousarray(gy), np.ascontiguousarray(w),
                      x_shape[0], x_shape[1], h + 2 * pad, wd + 2 * pad, stride)
    if pad == 0:
        return gxp
    return np.ascontiguousarray(gxp[:, :, pad:pad + h, pad:pad + wd])


def _grad_input(real[:, :, :, ::1] gy, real[:, :, :, ::1] w,
                Py_ssize_t n, Py_ssize_t cin, Py_ssize_t hp, Py_ssize_t wp, int stride):
    cdef Py_ssize_t cout = w.shape[0], kh = w.shape[2], kw = w.shape[3]
    cdef Py_ssize_t ho = gy.shape[2], wo = gy.shape[3]
    gxnp = np.zeros((n, cin, hp, wp), dtype=np.asarray(gy).dtype)
    cdef real[:, :, :, ::1] gx = gxnp
    cdef Py_ssize_t slab, i, ci, co, ky, kx, oy, ox, iy
    cdef real wv

    for slab in prange(n * cin, nogil=True, schedule='static'):
        i = slab // cin
        ci = slab % cin
        for co in range(cout):
            for ky in range(kh):
                for kx in range(kw):
                    wv = w[co, ci, ky, kx]
                    if stride == 1:
                        for oy in range(ho):
                            iy = oy + ky
                            for ox in range(wo):
                                gx[i, ci, iy, ox + kx] += wv * gy[i, co, oy, ox]
                    else:
                        for oy in range(ho):
                            iy = stride * oy + ky
                            for ox in range(wo):
                                gx[i, ci, iy, stride * ox + kx] += wv * gy[i, co, oy, ox]
    return gxnp


def conv2d_grad_weight(gy, x, w_shape, int stride=1, int pad=0):
    return _grad_weight(np.ascontiguousarray(gy), _padded(x, pad),
                        w_shape[0], w_shape[1], w_shape[2], w_shape[3], stride)


def _grad_weight(real[:, :, :, ::1] gy, real[:, :, :, ::1] xp,
                 Py_ssize_t cout, Py_ssize_t cin, Py_ssize_t kh, Py_ssize_t kw, int stride):
    cdef Py_ssize_t n = xp.shape[0]
    cdef Py_ssize_t ho = gy.shape[2], wo = gy.shape[3]
    gwnp = np.zeros((cout, cin, kh, kw), dtype=np.asarray(gy).dtype)
    cdef real[:, :, :, ::1] gw = gwnp
    cdef Py_ssize_t co, i, ci, ky, kx, oy, ox, iy
    cdef real acc

    for co in prange(cout, nogil=True, schedule='static'):
        for ci in range(cin):
            for ky in range(kh):
                for kx in range(kw):
                    acc = 0
                    for i in range(n):
                        if stride == 1:
                            for oy in range(ho):
                                iy = oy + ky
                                for ox in range(wo):
                                    acc = acc + xp[i, ci, iy, ox + kx] * gy[i, co, oy, ox]
                        else:
                            for oy in range(ho):
                                iy = stride * oy + ky
                                for ox in range(wo):
                                    acc = acc + xp[i, ci, iy, stride * ox + kx] * gy[i, co, oy, ox]
                    gw[co, ci, ky, kx] = acc
    return gwnp
