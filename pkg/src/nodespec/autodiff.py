"""Minimal reverse-mode differentiation over numpy arrays.

A Tensor records the op that produced it and a closure that pushes gradients
to its parents; calling backward() on a scalar output replays the tape in
reverse topological order. Only the operations the filtering models need are
implemented: dense/sparse matrix products, broadcast arithmetic, sigmoid,
ReLU, row selection, squared norms, and a fused softmax cross-entropy.
"""

import numpy as np

from .graph import SparseOperator, spmm


def _reduce_to_shape(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a broadcast gradient back down to the original operand shape."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, dim in enumerate(shape) if dim == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward_fn")

    def __init__(self, data, requires_grad=False, parents=(), backward_fn=None):
        self.data = np.asarray(data)
        if self.data.dtype.kind != "f":
            self.data = self.data.astype(np.float64)
        self.grad = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self._parents = parents
        self._backward_fn = backward_fn

    @property
    def shape(self):
        return self.data.shape

    def _accumulate(self, grad: np.ndarray) -> None:
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = np.array(grad, dtype=self.data.dtype)
        else:
            self.grad += grad

    def backward(self, seed=1.0) -> None:
        """Reverse pass from this (scalar) tensor with the given seed."""
        if self.data.ndim != 0 and self.data.size != 1:
            raise ValueError("backward() expects a scalar output")
        topo = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad:
                    stack.append((parent, False))
        self.grad = np.asarray(float(seed) * np.ones_like(self.data))
        for node in reversed(topo):
            if node._backward_fn is not None and node.grad is not None:
                node._backward_fn(node.grad)

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        other = as_tensor(other)
        out = Tensor(self.data + other.data, parents=(self, other))

        def push(g):
            self._accumulate(_reduce_to_shape(g, self.data.shape))
            other._accumulate(_reduce_to_shape(g, other.data.shape))

        out._backward_fn = push
        return out

    def __sub__(self, other):
        other = as_tensor(other)
        out = Tensor(self.data - other.data, parents=(self, other))

        def push(g):
            self._accumulate(_reduce_to_shape(g, self.data.shape))
            other._accumulate(-_reduce_to_shape(g, other.data.shape))

        out._backward_fn = push
        return out

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            # python scalars keep the array dtype; a wrapped 0-d array would
            # promote float32 operands to float64
            scalar = float(other)
            out = Tensor(self.data * scalar, parents=(self,))

            def push_scalar(g):
                self._accumulate(g * scalar)

            out._backward_fn = push_scalar
            return out
        other = as_tensor(other)
        out = Tensor(self.data * other.data, parents=(self, other))

        def push(g):
            self._accumulate(_reduce_to_shape(g * other.data, self.data.shape))
            other._accumulate(_reduce_to_shape(g * self.data, other.data.shape))

        out._backward_fn = push
        return out

    __radd__ = __add__
    __rmul__ = __mul__

    def __matmul__(self, other):
        other = as_tensor(other)
        out = Tensor(self.data @ other.data, parents=(self, other))

        def push(g):
            self._accumulate(g @ other.data.T)
            other._accumulate(self.data.T @ g)

        out._backward_fn = push
        return out

    def sigmoid(self):
        # Branch on sign to keep exp() arguments non-positive.
        x = self.data
        value = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))),
                         np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
        out = Tensor(value, parents=(self,))

        def push(g):
            self._accumulate(g * value * (1.0 - value))

        out._backward_fn = push
        return out

    def relu(self):
        out = Tensor(np.maximum(self.data, 0.0), parents=(self,))

        def push(g):
            self._accumulate(g * (self.data > 0.0))

        out._backward_fn = push
        return out

    def slice_rows(self, start, stop):
        out = Tensor(self.data[start:stop], parents=(self,))

        def push(g):
            full = np.zeros_like(self.data)
            full[start:stop] = g
            self._accumulate(full)

        out._backward_fn = push
        return out

    def transpose(self):
        out = Tensor(self.data.T, parents=(self,))

        def push(g):
            self._accumulate(g.T)

        out._backward_fn = push
        return out

    def sum_squares(self):
        out = Tensor(np.sum(self.data * self.data), parents=(self,))

        def push(g):
            self._accumulate(2.0 * float(g) * self.data)

        out._backward_fn = push
        return out


def as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def parameter(data) -> Tensor:
    return Tensor(np.array(data), requires_grad=True)


def sparse_matmul(op: SparseOperator, x: Tensor) -> Tensor:
    """op @ x for a constant symmetric sparse operator."""
    out = Tensor(spmm(op, x.data), parents=(x,))

    def push(g):
        x._accumulate(spmm(op, g))  # op is symmetric, so op^T = op

    out._backward_fn = push
    return out


def softmax_cross_entropy(logits: Tensor, labels, index) -> Tensor:
    """Mean negative log-softmax of the true class over the index set."""
    index = np.asarray(index, dtype=np.int64)
    if index.size == 0:
        raise ValueError("loss over an empty index set")
    labels = np.asarray(labels, dtype=np.int64)[index]
    rows = logits.data[index]
    shifted = rows - rows.max(axis=1, keepdims=True)
    log_z = np.log(np.sum(np.exp(shifted), axis=1))
    log_probs = shifted - log_z[:, None]
    value = -np.mean(log_probs[np.arange(index.size), labels])
    out = Tensor(value, parents=(logits,))

    def push(g):
        probs = np.exp(log_probs)
        probs[np.arange(index.size), labels] -= 1.0
        full = np.zeros_like(logits.data)
        full[index] = (float(g) / index.size) * probs
        logits._accumulate(full)

    out._backward_fn = push
    return out
