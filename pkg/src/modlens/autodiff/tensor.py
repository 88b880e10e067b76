"""Dense float64 tensors with reverse-mode differentiation.

The op set is deliberately small: matmul, elementwise add/mul/sub,
sigmoid, tanh, softmax, concat, slice, sum, mean, squared L2 norm,
an embedding-gather (mean of table rows per position) and a Bernoulli
log-likelihood node. That is everything the models in this package need.

All data is float64 and row-major. Gradients accumulate into ``.grad``
in a fixed topological order, so results are bit-reproducible for a
fixed graph and inputs.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np


class AutodiffError(Exception):
    """Base class for graph construction/evaluation failures."""


class ShapeError(AutodiffError):
    pass


class NonFiniteError(AutodiffError):
    """An op produced NaN/Inf; carries the offending op label."""

    def __init__(self, op: str):
        super().__init__(f"non-finite values produced by op '{op}'")
        self.op = op


def _as_array(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    return arr


class Tensor:
    """A node in the compute graph: a value plus how to push gradients back."""

    __slots__ = ("data", "grad", "requires_grad", "op", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, op: str = "leaf",
                 parents: tuple = ()):
        self.data = _as_array(data)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.op = op
        self._parents = parents
        self._backward: Callable[[], None] | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, op={self.op!r})"

    def zero_grad(self) -> None:
        self.grad = None

    def _accum(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self) -> None:
        """Backpropagate from a scalar node through the whole tape."""
        if self.data.size != 1:
            raise ShapeError(f"backward requires a scalar node, got shape {self.data.shape}")
        # Iterative topological sort: long recurrent tapes overflow the
        # recursion limit otherwise.
        topo: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in visited or not node.requires_grad:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in visited and p.requires_grad:
                    stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None:
                node._backward()

    # -- operator sugar -------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)


def constant(data) -> Tensor:
    return Tensor(data, requires_grad=False, op="const")


def parameter(data) -> Tensor:
    return Tensor(data, requires_grad=True, op="param")


def _lift(x) -> Tensor:
    return x if isinstance(x, Tensor) else constant(x)


def _check_finite(out: Tensor) -> Tensor:
    # Cheap guard on every op; inputs in valid domains keep this true.
    if not np.all(np.isfinite(out.data)):
        raise NonFiniteError(out.op)
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum `grad` down to `shape` (inverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    g = grad
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _binary(a: Tensor, b: Tensor, out_data: np.ndarray, op: str,
            da: Callable[[np.ndarray], np.ndarray],
            db: Callable[[np.ndarray], np.ndarray]) -> Tensor:
    req = a.requires_grad or b.requires_grad
    out = Tensor(out_data, requires_grad=req, op=op, parents=(a, b))
    if req:
        def _bw():
            g = out.grad
            if a.requires_grad:
                a._accum(_unbroadcast(da(g), a.data.shape))
            if b.requires_grad:
                b._accum(_unbroadcast(db(g), b.data.shape))
        out._backward = _bw
    return _check_finite(out)


def add(a, b) -> Tensor:
    a, b = _lift(a), _lift(b)
    return _binary(a, b, a.data + b.data, "add", lambda g: g, lambda g: g)


def sub(a, b) -> Tensor:
    a, b = _lift(a), _lift(b)
    return _binary(a, b, a.data - b.data, "sub", lambda g: g, lambda g: -g)


def mul(a, b) -> Tensor:
    a, b = _lift(a), _lift(b)
    return _binary(a, b, a.data * b.data, "mul",
                   lambda g: g * b.data, lambda g: g * a.data)


def matmul(a, b) -> Tensor:
    a, b = _lift(a), _lift(b)
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ShapeError(f"matmul needs 2-D operands, got {a.data.shape} @ {b.data.shape}")
    if a.data.shape[1] != b.data.shape[0]:
        raise ShapeError(f"matmul inner dimensions differ: {a.data.shape} @ {b.data.shape}")
    out_data = a.data @ b.data
    req = a.requires_grad or b.requires_grad
    out = Tensor(out_data, requires_grad=req, op="matmul", parents=(a, b))
    if req:
        def _bw():
            g = out.grad
            if a.requires_grad:
                a._accum(g @ b.data.T)
            if b.requires_grad:
                b._accum(a.data.T @ g)
        out._backward = _bw
    return _check_finite(out)


def _unary(a: Tensor, out_data: np.ndarray, op: str,
           da: Callable[[np.ndarray], np.ndarray]) -> Tensor:
    out = Tensor(out_data, requires_grad=a.requires_grad, op=op, parents=(a,))
    if a.requires_grad:
        def _bw():
            a._accum(da(out.grad))
        out._backward = _bw
    return _check_finite(out)


def sigmoid(a) -> Tensor:
    a = _lift(a)
    # Stable form: never exponentiates a large positive argument.
    x = a.data
    s = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))),
                 np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
    return _unary(a, s, "sigmoid", lambda g: g * s * (1.0 - s))


def tanh(a) -> Tensor:
    a = _lift(a)
    t = np.tanh(a.data)
    return _unary(a, t, "tanh", lambda g: g * (1.0 - t * t))


def softmax(a) -> Tensor:
    """Row-wise softmax over the last axis."""
    a = _lift(a)
    shifted = a.data - a.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=-1, keepdims=True)

    def _bw_grad(g):
        dot = (g * y).sum(axis=-1, keepdims=True)
        return y * (g - dot)

    return _unary(a, y, "softmax", _bw_grad)


def concat(parts: Sequence[Tensor], axis: int = 0) -> Tensor:
    parts = [_lift(p) for p in parts]
    if not parts:
        raise ShapeError("concat of zero tensors")
    out_data = np.concatenate([p.data for p in parts], axis=axis)
    req = any(p.requires_grad for p in parts)
    out = Tensor(out_data, requires_grad=req, op="concat", parents=tuple(parts))
    if req:
        sizes = [p.data.shape[axis] for p in parts]
        offsets = np.cumsum([0] + sizes)

        def _bw():
            g = out.grad
            for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
                if p.requires_grad:
                    idx = [slice(None)] * g.ndim
                    idx[axis] = slice(lo, hi)
                    p._accum(g[tuple(idx)])
        out._backward = _bw
    return _check_finite(out)


def slice_rows(a: Tensor, start: int, stop: int) -> Tensor:
    return _slice(a, 0, start, stop)


def slice_cols(a: Tensor, start: int, stop: int) -> Tensor:
    return _slice(a, 1, start, stop)


def _slice(a: Tensor, axis: int, start: int, stop: int) -> Tensor:
    a = _lift(a)
    if not (0 <= start <= stop <= a.data.shape[axis]):
        raise ShapeError(f"slice [{start}:{stop}] out of bounds for axis {axis} of {a.data.shape}")
    idx = [slice(None)] * a.data.ndim
    idx[axis] = slice(start, stop)
    idx = tuple(idx)
    out = Tensor(a.data[idx], requires_grad=a.requires_grad, op="slice", parents=(a,))
    if a.requires_grad:
        def _bw():
            g = np.zeros_like(a.data)
            g[idx] = out.grad
            a._accum(g)
        out._backward = _bw
    return _check_finite(out)


def tsum(a) -> Tensor:
    a = _lift(a)
    out_data = np.asarray(a.data.sum())
    return _unary(a, out_data, "sum", lambda g: np.full_like(a.data, float(g)))


def tmean(a) -> Tensor:
    a = _lift(a)
    n = a.data.size
    out_data = np.asarray(a.data.mean())
    return _unary(a, out_data, "mean", lambda g: np.full_like(a.data, float(g) / n))


def sq_l2(a) -> Tensor:
    """Sum of squares of all entries (squared L2 norm)."""
    a = _lift(a)
    out_data = np.asarray((a.data * a.data).sum())
    return _unary(a, out_data, "sq_l2", lambda g: 2.0 * float(g) * a.data)


def embed_mean(table: Tensor, bucket_ids: Sequence[np.ndarray]) -> Tensor:
    """Mean of table rows per position.

    ``bucket_ids[i]`` holds the bucket indices for position i; the output
    row i is the mean of those table rows. An empty index list yields a
    zero row (used for padding) and receives no gradient.
    """
    table = _lift(table)
    d = table.data.shape[1]
    out_data = np.zeros((len(bucket_ids), d), dtype=np.float64)
    for i, ids in enumerate(bucket_ids):
        if len(ids):
            out_data[i] = table.data[ids].mean(axis=0)
    out = Tensor(out_data, requires_grad=table.requires_grad, op="embed_mean",
                 parents=(table,))
    if table.requires_grad:
        def _bw():
            g = np.zeros_like(table.data)
            for i, ids in enumerate(bucket_ids):
                if len(ids):
                    np.add.at(g, ids, out.grad[i] / len(ids))
            table._accum(g)
        out._backward = _bw
    return _check_finite(out)


def bernoulli_log_prob(logits: Tensor, z: np.ndarray, mask: np.ndarray | None = None) -> Tensor:
    """log p(z) for z ~ Bernoulli(sigmoid(logits)), elementwise.

    Computed from logits via softplus so saturated probabilities never
    produce -inf. ``mask`` zeroes out padded positions. z and mask are
    constants; the gradient flows to the logits only:
    d log p / d logit = z - sigmoid(logit).
    """
    logits = _lift(logits)
    x = logits.data
    zc = np.asarray(z, dtype=np.float64)
    if zc.shape != x.shape:
        raise ShapeError(f"z shape {zc.shape} != logits shape {x.shape}")
    m = np.ones_like(x) if mask is None else np.asarray(mask, dtype=np.float64)
    # log sigmoid(x) = -softplus(-x); log(1-sigmoid(x)) = -softplus(x)
    softplus = lambda t: np.maximum(t, 0.0) + np.log1p(np.exp(-np.abs(t)))
    out_data = m * (zc * (-softplus(-x)) + (1.0 - zc) * (-softplus(x)))
    out = Tensor(out_data, requires_grad=logits.requires_grad, op="bern_logp",
                 parents=(logits,))
    if logits.requires_grad:
        p = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))),
                     np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))

        def _bw():
            logits._accum(out.grad * m * (zc - p))
        out._backward = _bw
    return _check_finite(out)


def scale(a: Tensor, factor: float) -> Tensor:
    return mul(a, constant(np.float64(factor)))


def zero_grads(params: Iterable[Tensor]) -> None:
    for p in params:
        p.zero_grad()
