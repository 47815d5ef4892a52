"""Reverse-mode gradient engine over small dense float64 tensors.

A Tensor records the primitive operation that produced it together with its
parent tensors, so the forward pass builds the computation graph implicitly
(the tape). ``backward(loss)`` topologically sorts that graph and accumulates
gradients of the scalar loss into every tensor created with
``requires_grad=True``.

Primitives: elementwise add/sub/mul/pow, matmul (2-D and batched 3-D),
tanh/sigmoid/relu, softmax over the last axis, concatenation, slicing,
reshape/swapaxes, sum/mean reductions. ``affine``, ``layer_norm`` and
``mse_loss`` are composites of those primitives, so their gradients need no
separate derivation.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

__all__ = [
    "Tensor",
    "parameter",
    "constant",
    "backward",
    "concat",
    "affine",
    "layer_norm",
    "mse_loss",
]


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to the original operand shape."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Tensor:
    """Node of the implicit computation graph.

    ``data`` is always a float64 ndarray; ``grad`` is populated by backward()
    for tensors that require gradients or have parents that do.
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward_fn")

    def __init__(self, data, requires_grad: bool = False, parents: tuple = (), backward_fn=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self._parents = parents
        self._backward_fn = backward_fn

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # -- elementwise arithmetic (numpy broadcasting rules apply) --

    def __add__(self, other) -> "Tensor":
        other = _lift(other)
        out = Tensor(self.data + other.data, parents=(self, other))

        def bw(grad):
            return _unbroadcast(grad, self.shape), _unbroadcast(grad, other.shape)

        out._backward_fn = bw
        return out

    __radd__ = __add__

    def __neg__(self) -> "Tensor":
        out = Tensor(-self.data, parents=(self,))
        out._backward_fn = lambda grad: (-grad,)
        return out

    def __sub__(self, other) -> "Tensor":
        return self + (-_lift(other))

    def __rsub__(self, other) -> "Tensor":
        return _lift(other) + (-self)

    def __mul__(self, other) -> "Tensor":
        other = _lift(other)
        out = Tensor(self.data * other.data, parents=(self, other))

        def bw(grad):
            return (
                _unbroadcast(grad * other.data, self.shape),
                _unbroadcast(grad * self.data, other.shape),
            )

        out._backward_fn = bw
        return out

    __rmul__ = __mul__

    def __pow__(self, exponent: float) -> "Tensor":
        if not isinstance(exponent, (int, float)):
            raise TypeError("tensor exponent must be a python scalar")
        out = Tensor(self.data**exponent, parents=(self,))
        out._backward_fn = lambda grad: (grad * exponent * self.data ** (exponent - 1),)
        return out

    def __truediv__(self, other) -> "Tensor":
        return self * (_lift(other) ** -1.0)

    def __matmul__(self, other) -> "Tensor":
        other = _lift(other)
        out = Tensor(self.data @ other.data, parents=(self, other))

        def bw(grad):
            ga = grad @ np.swapaxes(other.data, -1, -2)
            gb = np.swapaxes(self.data, -1, -2) @ grad
            return _unbroadcast(ga, self.shape), _unbroadcast(gb, other.shape)

        out._backward_fn = bw
        return out

    # -- shape ops --

    def __getitem__(self, index) -> "Tensor":
        out = Tensor(self.data[index], parents=(self,))

        def bw(grad):
            full = np.zeros_like(self.data)
            full[index] = grad
            return (full,)

        out._backward_fn = bw
        return out

    def reshape(self, *shape: int) -> "Tensor":
        out = Tensor(self.data.reshape(*shape), parents=(self,))
        out._backward_fn = lambda grad: (grad.reshape(self.data.shape),)
        return out

    def swapaxes(self, a: int, b: int) -> "Tensor":
        out = Tensor(np.swapaxes(self.data, a, b), parents=(self,))
        out._backward_fn = lambda grad: (np.swapaxes(grad, a, b),)
        return out

    # -- nonlinearities --

    def tanh(self) -> "Tensor":
        y = np.tanh(self.data)
        out = Tensor(y, parents=(self,))
        out._backward_fn = lambda grad: (grad * (1.0 - y * y),)
        return out

    def sigmoid(self) -> "Tensor":
        y = 1.0 / (1.0 + np.exp(-self.data))
        out = Tensor(y, parents=(self,))
        out._backward_fn = lambda grad: (grad * y * (1.0 - y),)
        return out

    def relu(self) -> "Tensor":
        out = Tensor(np.maximum(self.data, 0.0), parents=(self,))
        out._backward_fn = lambda grad: (grad * (self.data > 0.0),)
        return out

    def softmax(self) -> "Tensor":
        """Softmax over the last axis. d_x = p * (g - sum(g * p))."""
        shifted = self.data - self.data.max(axis=-1, keepdims=True)
        e = np.exp(shifted)
        p = e / e.sum(axis=-1, keepdims=True)
        out = Tensor(p, parents=(self,))

        def bw(grad):
            inner = (grad * p).sum(axis=-1, keepdims=True)
            return (p * (grad - inner),)

        out._backward_fn = bw
        return out

    # -- reductions --

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        out = Tensor(self.data.sum(axis=axis, keepdims=keepdims), parents=(self,))

        def bw(grad):
            g = np.asarray(grad)
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, self.data.shape).copy(),)

        out._backward_fn = bw
        return out

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        count = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    def backward(self) -> None:
        backward(self)


def _lift(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def parameter(data, rng: np.random.Generator | None = None, fan_in: int | None = None) -> Tensor:
    """Trainable tensor. With rng and fan_in, init uniform in +-1/sqrt(fan_in)."""
    if rng is not None:
        if fan_in is None or fan_in < 1:
            raise ValueError("fan_in required for random initialization")
        bound = 1.0 / np.sqrt(fan_in)
        data = rng.uniform(-bound, bound, size=data)
    return Tensor(data, requires_grad=True)


def constant(data) -> Tensor:
    return Tensor(data, requires_grad=False)


def backward(loss: Tensor) -> None:
    """Accumulate d loss / d t into t.grad for every reachable tensor.

    The loss must be scalar. Gradients add onto any existing .grad, so call
    sites zero them between steps (zero_grads).
    """
    if loss.data.size != 1:
        raise ValueError(f"backward requires a scalar loss, got shape {loss.data.shape}")

    topo: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            topo.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in visited:
                stack.append((p, False))

    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(topo):
        grad = grads.pop(id(node), None)
        if grad is None:
            continue
        if node.requires_grad and node._backward_fn is None:
            node.grad = grad if node.grad is None else node.grad + grad
        if node._backward_fn is None:
            continue
        parent_grads = node._backward_fn(grad)
        for p, g in zip(node._parents, parent_grads):
            if not p.requires_grad:
                continue
            if id(p) in grads:
                grads[id(p)] = grads[id(p)] + g
            else:
                grads[id(p)] = g


def zero_grads(params: Sequence[Tensor]) -> None:
    for p in params:
        p.grad = None


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    parts = [_lift(t) for t in tensors]
    out = Tensor(np.concatenate([t.data for t in parts], axis=axis), parents=tuple(parts))
    sizes = [t.data.shape[axis] for t in parts]
    splits = np.cumsum(sizes)[:-1]

    def bw(grad):
        return tuple(np.split(grad, splits, axis=axis))

    out._backward_fn = bw
    return out


def affine(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """x @ weight + bias over the last axis."""
    return x @ weight + bias


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean / unit variance, then scale and shift."""
    mu = x.mean(axis=-1, keepdims=True)
    centered = x - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv = (var + eps) ** -0.5
    return centered * inv * gain + bias


def mse_loss(predicted: Tensor, target: Tensor) -> Tensor:
    """Scalar mean of squared differences."""
    diff = predicted - _lift(target)
    return (diff * diff).mean()
