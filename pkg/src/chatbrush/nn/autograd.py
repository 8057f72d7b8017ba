"""Reverse-mode automatic differentiation over numpy arrays.

A small tape: each op records its parents and a vector-Jacobian closure on
the output tensor. ``Tensor.backward()`` walks the graph in reverse topological
order. Convolutions dispatch to :mod:`chatbrush.nn.kernels`; everything else
is plain numpy, so gradients can be validated against finite differences in
float64.
"""
from contextlib import contextmanager

import numpy as np

from . import kernels

_grad_enabled = True


@contextmanager
def no_grad():
    """Disable graph recording (inference mode)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_vjp")

    def __init__(self, data, requires_grad=False):
        self.data = np.asarray(data)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = ()
        self._vjp = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}, grad={self.requires_grad})"

    def backward(self, grad=None):
        if grad is None:
            if self.data.size != 1:
                raise ValueError("backward() without a gradient needs a scalar output")
            grad = np.ones_like(self.data)
        topo, seen, stack = [], set(), [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad:
                    stack.append((p, False))
        self.grad = np.asarray(grad, dtype=self.data.dtype)
        for node in reversed(topo):
            if node._vjp is None or node.grad is None:
                continue
            for parent, g in zip(node._parents, node._vjp(node.grad)):
                if not parent.requires_grad or g is None:
                    continue
                if parent.grad is None:
                    parent.grad = g
                else:
                    parent.grad = parent.grad + g
            node.grad = None if node._parents else node.grad  # free non-leaf grads

    def zero_grad(self):
        self.grad = None

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __sub__(self, other):
        return add(self, mul(other, -1.0))

    def __rsub__(self, other):
        return add(mul(self, -1.0), other)

    def __neg__(self):
        return mul(self, -1.0)

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            return mul(self, power(other, -1.0))
        return mul(self, 1.0 / other)

    def __matmul__(self, other):
        return matmul(self, other)

    def __pow__(self, p):
        return power(self, p)

    def __getitem__(self, key):
        return getitem(self, key)

    def reshape(self, *shape):
        return reshape(self, shape if len(shape) > 1 or isinstance(shape[0], int) else shape[0])

    def transpose(self, *axes):
        return transpose(self, axes)

    def sum(self, axis=None, keepdims=False):
        return tensor_sum(self, axis, keepdims)

    def mean(self, axis=None, keepdims=False):
        return tensor_mean(self, axis, keepdims)


def as_tensor(x, dtype=None):
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=dtype))


def _node(data, parents, vjp):
    out = Tensor(data)
    if _grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._vjp = vjp
    return out


def _unbroadcast(g, shape):
    """Reduce gradient g back to `shape` after numpy broadcasting."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def add(a, b):
    # python scalars stay weak so float32 graphs are not promoted to float64
    if isinstance(a, Tensor) and not isinstance(b, Tensor) and np.isscalar(b):
        return _node(a.data + b, (a,), lambda g: (g,))
    if isinstance(b, Tensor) and not isinstance(a, Tensor) and np.isscalar(a):
        return _node(a + b.data, (b,), lambda g: (g,))
    a, b = as_tensor(a), as_tensor(b)
    data = a.data + b.data
    return _node(data, (a, b), lambda g: (_unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)))


def mul(a, b):
    if not isinstance(b, Tensor) and np.isscalar(b):
        a = as_tensor(a)
        data = a.data * b
        return _node(data, (a,), lambda g: (g * b,))
    a, b = as_tensor(a), as_tensor(b)
    data = a.data * b.data
    return _node(data, (a, b), lambda g: (
        _unbroadcast(g * b.data, a.data.shape),
        _unbroadcast(g * a.data, b.data.shape),
    ))


def power(a, p):
    a = as_tensor(a)
    data = a.data ** p
    return _node(data, (a,), lambda g: (g * p * a.data ** (p - 1.0),))


def exp(a):
    a = as_tensor(a)
    data = np.exp(a.data)
    return _node(data, (a,), lambda g: (g * data,))


def log(a):
    a = as_tensor(a)
    data = np.log(a.data)
    return _node(data, (a,), lambda g: (g / a.data,))


def sigmoid(a):
    a = as_tensor(a)
    data = 1.0 / (1.0 + np.exp(-a.data))
    return _node(data, (a,), lambda g: (g * data * (1.0 - data),))


def silu(a):
    a = as_tensor(a)
    s = 1.0 / (1.0 + np.exp(-a.data))
    data = a.data * s
    return _node(data, (a,), lambda g: (g * (s + a.data * s * (1.0 - s)),))


def tanh(a):
    a = as_tensor(a)
    data = np.tanh(a.data)
    return _node(data, (a,), lambda g: (g * (1.0 - data * data),))


def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    data = a.data @ b.data

    def vjp(g):
        at = np.swapaxes(a.data, -1, -2)
        bt = np.swapaxes(b.data, -1, -2)
        ga = g @ bt
        gb = at @ g
        if ga.shape != a.data.shape:
            ga = _unbroadcast(ga, a.data.shape)
        if gb.shape != b.data.shape:
            gb = _unbroadcast(gb, b.data.shape)
        return ga, gb

    return _node(data, (a, b), vjp)


def conv2d(x, w, stride=1, pad=0):
    x, w = as_tensor(x), as_tensor(w)
    data = kernels.conv2d_forward(x.data, w.data, stride, pad)

    def vjp(g):
        g = np.ascontiguousarray(g)
        return (
            kernels.conv2d_grad_input(g, w.data, x.data.shape, stride, pad),
            kernels.conv2d_grad_weight(g, x.data, w.data.shape, stride, pad),
        )

    return _node(data, (x, w), vjp)


def tensor_sum(a, axis=None, keepdims=False):
    a = as_tensor(a)
    data = a.data.sum(axis=axis, keepdims=keepdims)

    def vjp(g):
        if axis is None:
            return (np.broadcast_to(g, a.data.shape).copy(),)
        g2 = g if keepdims else np.expand_dims(g, axis)
        return (np.broadcast_to(g2, a.data.shape).copy(),)

    return _node(data, (a,), vjp)


def tensor_mean(a, axis=None, keepdims=False):
    a = as_tensor(a)
    n = a.data.size if axis is None else np.prod([a.data.shape[i] for i in np.atleast_1d(axis)])
    return mul(tensor_sum(a, axis, keepdims), 1.0 / float(n))


def reshape(a, shape):
    a = as_tensor(a)
    data = a.data.reshape(shape)
    return _node(data, (a,), lambda g: (g.reshape(a.data.shape),))


def transpose(a, axes):
    a = as_tensor(a)
    axes = tuple(axes)
    data = a.data.transpose(axes)
    inv = tuple(np.argsort(axes))
    return _node(data, (a,), lambda g: (g.transpose(inv),))


def concat(tensors, axis=0):
    tensors = [as_tensor(t) for t in tensors]
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def vjp(g):
        return tuple(np.ascontiguousarray(p) for p in np.split(g, splits, axis=axis))

    return _node(data, tuple(tensors), vjp)


def getitem(a, key):
    a = as_tensor(a)
    data = a.data[key]

    def vjp(g):
        gx = np.zeros_like(a.data)
        gx[key] += g  # basic indexing only: slices never alias
        return (gx,)

    return _node(data, (a,), vjp)


def embedding(table, ids):
    """Row gather from a (V, D) table; ids is a plain integer array."""
    table = as_tensor(table)
    ids = np.asarray(ids)
    data = table.data[ids]

    def vjp(g):
        gt = np.zeros_like(table.data)
        np.add.at(gt, ids, g)
        return (gt,)

    return _node(data, (table,), vjp)


def upsample_nearest2x(a):
    a = as_tensor(a)
    data = a.data.repeat(2, axis=-2).repeat(2, axis=-1)

    def vjp(g):
        n, c, h2, w2 = g.shape
        return (g.reshape(n, c, h2 // 2, 2, w2 // 2, 2).sum(axis=(3, 5)),)

    return _node(data, (a,), vjp)


def groupnorm(x, gamma, beta, groups, eps=1e-5):
    """Fused group normalization over (N, C, H, W); gamma/beta are (1, C, 1, 1)."""
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    n, c, h, w = x.data.shape
    xg = x.data.reshape(n, groups, -1)
    mu = xg.mean(axis=2, keepdims=True)
    var = xg.var(axis=2, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = ((xg - mu) * inv).reshape(n, c, h, w)
    data = xhat * gamma.data + beta.data

    def vjp(g):
        dgamma = (g * xhat).sum(axis=(0, 2, 3), keepdims=True)
        dbeta = g.sum(axis=(0, 2, 3), keepdims=True)
        dxh = (g * gamma.data).reshape(n, groups, -1)
        xh = xhat.reshape(n, groups, -1)
        m = dxh.shape[2]
        t1 = dxh.sum(axis=2, keepdims=True)
        t2 = (dxh * xh).sum(axis=2, keepdims=True)
        dx = inv / m * (m * dxh - t1 - xh * t2)
        return dx.reshape(n, c, h, w), dgamma, dbeta

    return _node(data, (x, gamma, beta), vjp)


def softmax(a, axis=-1):
    a = as_tensor(a)
    z = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(z)
    data = e / e.sum(axis=axis, keepdims=True)

    def vjp(g):
        dot = (g * data).sum(axis=axis, keepdims=True)
        return ((g - dot) * data,)

    return _node(data, (a,), vjp)


def nll_per_row(logits, targets):
    """Per-row negative log-likelihood: logsumexp(logits) - logits[target].

    logits: (N, V) tensor; targets: (N,) int array. Softmax and gather are
    fused so the backward is one dense pass.
    """
    logits = as_tensor(logits)
    targets = np.asarray(targets)
    z = logits.data - logits.data.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1)) + logits.data.max(axis=1)
    rows = np.arange(logits.data.shape[0])
    data = lse - logits.data[rows, targets]

    def vjp(g):
        p = np.exp(logits.data - lse[:, None])
        p[rows, targets] -= 1.0
        return (p * g[:, None],)

    return _node(data, (logits,), vjp)
