"""Minimal reverse-mode gradient engine.

Only the operations used by the shipped networks exist: dense products,
broadcasting add/mul, pointwise rectifier/sigmoid/abs, concatenation,
gathers, reductions, row normalization and the handful of losses. Values are
float64 numpy arrays. Matrix products broadcast over leading batch axes the
way ``np.matmul`` does.

Kink-bearing ops (relu, abs) append their branch pattern to an optional
recorder so a finite-difference check can skip coordinates whose step moves
an input across a kink.
"""

from __future__ import annotations

import numpy as np

_recorder: list | None = None


class Tensor:
    __slots__ = ("value", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, value, requires_grad: bool = False, parents=(), backward=None):
        self.value = np.asarray(value, dtype=float)
        self.grad = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self._parents = parents if self.requires_grad else ()
        self._backward = backward if self.requires_grad else None

    @property
    def shape(self):
        return self.value.shape

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, scale(as_tensor(other), -1.0))

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return matmul(self, other)

    def backward(self, seed=None):
        """Accumulate d(self)/d(leaf) into every leaf's ``grad``."""
        order = _topo(self)
        grads = {id(self): np.ones_like(self.value) if seed is None else np.asarray(seed, dtype=float)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._backward is None:
                node.grad = g if node.grad is None else node.grad + g
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None or not parent.requires_grad:
                    continue
                key = id(parent)
                grads[key] = pg if key not in grads else grads[key] + pg


def _topo(root: Tensor) -> list[Tensor]:
    seen, order, stack = set(), [], [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in seen:
                stack.append((p, False))
    return order


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def record_kinks(enabled: bool) -> list | None:
    """Start (or stop) recording kink patterns; returns the finished record."""
    global _recorder
    done = _recorder
    _recorder = [] if enabled else None
    return done


def _note(pattern: np.ndarray):
    if _recorder is not None:
        _recorder.append(pattern)


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return Tensor(
        a.value + b.value,
        parents=(a, b),
        backward=lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
    )


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return Tensor(
        a.value * b.value,
        parents=(a, b),
        backward=lambda g: (_unbroadcast(g * b.value, a.shape), _unbroadcast(g * a.value, b.shape)),
    )


def scale(a: Tensor, c: float) -> Tensor:
    return Tensor(a.value * c, parents=(a,), backward=lambda g: (g * c,))


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def back(g):
        ga = gb = None
        if a.requires_grad:
            ga = _unbroadcast(g @ np.swapaxes(b.value, -1, -2), a.shape)
        if b.requires_grad:
            gb = _unbroadcast(np.swapaxes(a.value, -1, -2) @ g, b.shape)
        return ga, gb

    return Tensor(a.value @ b.value, parents=(a, b), backward=back)


def lmul(m, x: Tensor) -> Tensor:
    """Constant (dense or scipy-sparse) matrix times ``x``."""
    return Tensor(m @ x.value, parents=(x,), backward=lambda g: (m.T @ g,))


def relu(x: Tensor) -> Tensor:
    on = x.value > 0
    _note(on)
    return Tensor(np.where(on, x.value, 0.0), parents=(x,), backward=lambda g: (g * on,))


def sigmoid(x: Tensor) -> Tensor:
    s = 0.5 * (1.0 + np.tanh(0.5 * x.value))
    return Tensor(s, parents=(x,), backward=lambda g: (g * s * (1.0 - s),))


def absolute(x: Tensor) -> Tensor:
    sign = np.sign(x.value)
    _note(sign)
    return Tensor(np.abs(x.value), parents=(x,), backward=lambda g: (g * sign,))


def concat(parts: list[Tensor], axis: int = -1) -> Tensor:
    parts = [as_tensor(p) for p in parts]
    value = np.concatenate([p.value for p in parts], axis=axis)
    cuts = np.cumsum([p.shape[axis] for p in parts])[:-1]

    def back(g):
        return tuple(np.split(g, cuts, axis=axis))

    return Tensor(value, parents=tuple(parts), backward=back)


def take(x: Tensor, index: np.ndarray, axis: int = 0) -> Tensor:
    """Gather slices along ``axis``; repeated indices accumulate on the way back."""
    index = np.asarray(index)

    def back(g):
        out = np.zeros_like(x.value)
        moved = np.moveaxis(out, axis, 0)
        np.add.at(moved, index, np.moveaxis(g, axis, 0))
        return (out,)

    return Tensor(np.take(x.value, index, axis=axis), parents=(x,), backward=back)


def total(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    def back(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)

    return Tensor(x.value.sum(axis=axis, keepdims=keepdims), parents=(x,), backward=back)


def mean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    n = x.value.size if axis is None else x.shape[axis]
    return scale(total(x, axis, keepdims), 1.0 / n)


def transpose(x: Tensor) -> Tensor:
    return Tensor(np.swapaxes(x.value, -1, -2), parents=(x,), backward=lambda g: (np.swapaxes(g, -1, -2),))


def normalize_rows(x: Tensor, eps: float = 1e-12) -> Tensor:
    """Rows scaled to unit Euclidean norm (rows of norm < eps left tiny, not NaN)."""
    norm = np.sqrt((x.value**2).sum(axis=-1, keepdims=True))
    norm = np.maximum(norm, eps)
    y = x.value / norm

    def back(g):
        return ((g - y * (g * y).sum(axis=-1, keepdims=True)) / norm,)

    return Tensor(y, parents=(x,), backward=back)


def softmax_cross_entropy(logits: Tensor, targets: np.ndarray) -> Tensor:
    """Mean over rows of -log softmax(logits)[row, target]."""
    z = logits.value - logits.value.max(axis=-1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=-1, keepdims=True))
    rows = np.arange(len(targets))
    loss = -logp[rows, targets].mean()

    def back(g):
        grad = np.exp(logp)
        grad[rows, targets] -= 1.0
        return (g * grad / len(targets),)

    return Tensor(loss, parents=(logits,), backward=back)


def bce_with_logits(logits: Tensor, targets: np.ndarray) -> Tensor:
    x, y = logits.value, np.asarray(targets, dtype=float)
    loss = (np.maximum(x, 0) - x * y + np.log1p(np.exp(-np.abs(x)))).mean()
    p = 0.5 * (1.0 + np.tanh(0.5 * x))
    return Tensor(loss, parents=(logits,), backward=lambda g: (g * (p - y) / x.size,))


def mse(pred: Tensor, target: np.ndarray) -> Tensor:
    diff = pred.value - target
    return Tensor((diff**2).mean(), parents=(pred,), backward=lambda g: (g * 2.0 * diff / diff.size,))


def mae(pred: Tensor, target: np.ndarray) -> Tensor:
    diff = pred.value - target
    sign = np.sign(diff)
    _note(sign)
    return Tensor(np.abs(diff).mean(), parents=(pred,), backward=lambda g: (g * sign / diff.size,))
