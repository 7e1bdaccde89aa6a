"""Minimal tape-free reverse-mode differentiation over numpy arrays.

Each :class:`Tensor` remembers its parents and a closure that pushes its
gradient back to them. :meth:`Tensor.backward` walks the graph in reverse
topological order. Only the operations the GNN needs are provided.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.special import ndtr

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, _parents=(), _backward=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in _parents)
        self._parents = _parents if self.requires_grad else ()
        self._backward = _backward if self.requires_grad else None

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    def _accum(self, g):
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float64, copy=True)
        else:
            self.grad += g

    def backward(self, grad=None):
        """Accumulate d(self)/d(leaf) into every leaf's ``grad``."""
        if grad is None:
            if self.data.size != 1:
                raise ValueError("backward() without a seed requires a scalar output")
            grad = np.ones_like(self.data)
        order, seen = [], set()
        stack = [(self, False)]
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
        self._accum(grad)
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)
                if node._parents:
                    node.grad = None  # interior buffers are not needed after use

    # arithmetic sugar
    def __add__(self, other):
        return add(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g.reshape(shape)


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def back(g):
        a._accum(_unbroadcast(g, a.shape))
        b._accum(_unbroadcast(g, b.shape))

    return Tensor(a.data + b.data, _parents=(a, b), _backward=back)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def back(g):
        if a.requires_grad:
            a._accum(_unbroadcast(g * b.data, a.shape))
        if b.requires_grad:
            b._accum(_unbroadcast(g * a.data, b.shape))

    return Tensor(a.data * b.data, _parents=(a, b), _backward=back)


def scale(a, c: float) -> Tensor:
    a = as_tensor(a)
    return Tensor(a.data * c, _parents=(a,), _backward=lambda g: a._accum(g * c))


def matmul(a, b) -> Tensor:
    """Matrix product; ``b`` may be 2-D or a vector."""
    a, b = as_tensor(a), as_tensor(b)

    def back(g):
        if b.data.ndim == 1:
            if a.requires_grad:
                a._accum(np.outer(g, b.data))
            if b.requires_grad:
                b._accum(a.data.T @ g)
            return
        if a.requires_grad:
            a._accum(g @ b.data.T)
        if b.requires_grad:
            b._accum(a.data.T @ g)

    return Tensor(a.data @ b.data, _parents=(a, b), _backward=back)


def tanh(a) -> Tensor:
    a = as_tensor(a)
    out = np.tanh(a.data)
    return Tensor(out, _parents=(a,), _backward=lambda g: a._accum(g * (1.0 - out * out)))


def gelu(a) -> Tensor:
    """Exact GELU, ``x * Phi(x)``."""
    a = as_tensor(a)
    x = a.data
    cdf = ndtr(x)

    def back(g):
        pdf = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
        a._accum(g * (cdf + x * pdf))

    return Tensor(x * cdf, _parents=(a,), _backward=back)


def _segment_sum(values: np.ndarray, idx: np.ndarray, n: int) -> np.ndarray:
    """Rows of ``values`` summed into ``n`` buckets given by ``idx``."""
    if values.ndim == 1:
        return np.bincount(idx, weights=values, minlength=n)
    S = sp.csr_matrix((np.ones(idx.size), (idx, np.arange(idx.size))), shape=(n, idx.size))
    return np.asarray(S @ values)


def take_rows(a, idx: np.ndarray) -> Tensor:
    """``a[idx]`` along the first axis."""
    a = as_tensor(a)
    n = a.shape[0]
    return Tensor(a.data[idx], _parents=(a,), _backward=lambda g: a._accum(_segment_sum(g, idx, n)))


def scatter_add_rows(a, idx: np.ndarray, n: int) -> Tensor:
    """``out[i] = sum of a[j] over j with idx[j] == i`` for ``i < n``."""
    a = as_tensor(a)
    out = _segment_sum(a.data, idx, n)
    return Tensor(out, _parents=(a,), _backward=lambda g: a._accum(g[idx]))


def weighted_gather_scatter(weight, a, recv: np.ndarray, send: np.ndarray, n: int) -> Tensor:
    """``out[i] = sum over m with recv[m] == i of weight[m] * a[send[m]]``.

    Equivalent to ``scatter_add_rows(take_rows(a, send) * weight[:, None], recv, n)``
    but evaluated as one sparse product.
    """
    weight, a = as_tensor(weight), as_tensor(a)
    A = sp.csr_matrix((weight.data, (recv, send)), shape=(n, a.shape[0]))

    def back(g):
        if a.requires_grad:
            a._accum(np.asarray(A.T @ g))
        if weight.requires_grad:
            weight._accum(np.einsum("ij,ij->i", g[recv], a.data[send]))

    return Tensor(np.asarray(A @ a.data), _parents=(weight, a), _backward=back)


def cross_entropy(logits, targets: np.ndarray) -> Tensor:
    """Mean softmax cross-entropy of ``logits`` rows against int ``targets``."""
    z = as_tensor(logits)
    shifted = z.data - z.data.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    logp = shifted - logsum
    m = targets.shape[0]
    loss = -logp[np.arange(m), targets].mean()

    def back(g):
        p = np.exp(logp)
        p[np.arange(m), targets] -= 1.0
        z._accum(g * p / m)

    return Tensor(loss, _parents=(z,), _backward=back)
