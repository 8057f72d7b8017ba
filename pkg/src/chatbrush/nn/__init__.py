from . import autograd, kernels, layers, optim, serialize
from .autograd import Tensor, no_grad

__all__ = ["autograd", "kernels", "layers", "optim", "serialize", "Tensor", "no_grad"]
