"""Parameterised layers built on the autograd tape."""
import numpy as np

from . import autograd as ag
from .autograd import Tensor


class Module:
    """Minimal module: tracks parameters and child modules by attribute name."""

    def __setattr__(self, name, value):
        if isinstance(value, Tensor) and value.requires_grad:
            self.__dict__.setdefault("_params", {})[name] = value
        elif isinstance(value, Module):
            self.__dict__.setdefault("_children", {})[name] = value
        elif isinstance(value, ModuleList):
            self.__dict__.setdefault("_children", {})[name] = value
        object.__setattr__(self, name, value)

    def parameters(self, prefix=""):
        out = {}
        for name, p in self.__dict__.get("_params", {}).items():
            out[prefix + name] = p
        for name, child in self.__dict__.get("_children", {}).items():
            out.update(child.parameters(prefix=f"{prefix}{name}."))
        return out

    def load_state(self, arrays, prefix=""):
        params = self.parameters()
        missing = set(params) - set(arrays)
        if missing:
            raise KeyError(f"checkpoint missing parameters: {sorted(missing)[:5]}...")
        for name, p in params.items():
            a = np.asarray(arrays[name])
            if a.shape != p.data.shape:
                raise ValueError(f"shape mismatch for {name}: {a.shape} vs {p.data.shape}")
            p.data = a.astype(p.data.dtype, copy=True)

    def state_arrays(self):
        return {name: p.data.copy() for name, p in self.parameters().items()}

    def astype(self, dtype):
        for p in self.parameters().values():
            p.data = p.data.astype(dtype)
        return self

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)


class ModuleList:
    def __init__(self, modules=()):
        self._modules = list(modules)

    def append(self, m):
        self._modules.append(m)

    def __iter__(self):
        return iter(self._modules)

    def __getitem__(self, i):
        return self._modules[i]

    def __len__(self):
        return len(self._modules)

    def parameters(self, prefix=""):
        out = {}
        for i, m in enumerate(self._modules):
            out.update(m.parameters(prefix=f"{prefix}{i}."))
        return out


def _param(a, dtype):
    return Tensor(np.asarray(a, dtype=dtype), requires_grad=True)


class Linear(Module):
    def __init__(self, din, dout, rng, bias=True, init_scale=1.0, dtype=np.float32):
        std = init_scale / np.sqrt(din)
        self.w = _param(rng.normal(0.0, std, size=(din, dout)), dtype)
        self.b = _param(np.zeros(dout), dtype) if bias else None

    def forward(self, x):
        y = ag.matmul(x, self.w)
        return y if self.b is None else ag.add(y, self.b)


class Conv2d(Module):
    def __init__(self, cin, cout, k, rng, stride=1, pad=None, bias=True,
                 init_scale=1.0, dtype=np.float32):
        self.stride = stride
        self.pad = k // 2 if pad is None else pad
        std = init_scale * np.sqrt(2.0 / (cin * k * k))
        self.w = _param(rng.normal(0.0, std, size=(cout, cin, k, k)), dtype)
        self.b = _param(np.zeros(cout), dtype) if bias else None

    def forward(self, x):
        y = ag.conv2d(x, self.w, stride=self.stride, pad=self.pad)
        if self.b is None:
            return y
        return ag.add(y, ag.reshape(self.b, (1, -1, 1, 1)))


class Embedding(Module):
    def __init__(self, vocab, dim, rng, std=0.02, dtype=np.float32):
        self.table = _param(rng.normal(0.0, std, size=(vocab, dim)), dtype)

    def forward(self, ids):
        return ag.embedding(self.table, ids)


class GroupNorm(Module):
    def __init__(self, groups, channels, eps=1e-5, dtype=np.float32):
        if channels % groups:
            raise ValueError("channels must divide evenly into groups")
        self.groups = groups
        self.eps = eps
        self.gamma = _param(np.ones((1, channels, 1, 1)), dtype)
        self.beta = _param(np.zeros((1, channels, 1, 1)), dtype)

    def forward(self, x):
        return ag.groupnorm(x, self.gamma, self.beta, self.groups, self.eps)


class LayerNorm(Module):
    def __init__(self, dim, eps=1e-5, dtype=np.float32):
        self.eps = eps
        self.gamma = _param(np.ones(dim), dtype)
        self.beta = _param(np.zeros(dim), dtype)

    def forward(self, x):
        mu = ag.tensor_mean(x, axis=-1, keepdims=True)
        cent = ag.add(x, ag.mul(mu, -1.0))
        var = ag.tensor_mean(ag.power(cent, 2.0), axis=-1, keepdims=True)
        inv = ag.power(ag.add(var, self.eps), -0.5)
        return ag.add(ag.mul(ag.mul(cent, inv), self.gamma), self.beta)
