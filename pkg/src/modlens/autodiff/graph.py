"""Named compute graphs over the tensor op set.

A :class:`ComputeGraph` couples named parameter leaves with a pure build
function mapping input bindings to named outputs. The build function is
re-executed per evaluation; a symbolic trace (op kind, parent ids, shape)
is recorded once at construction for introspection and shape checking.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .tensor import AutodiffError, NonFiniteError, ShapeError, Tensor, constant


class UnboundInputError(AutodiffError):
    pass


@dataclass(frozen=True)
class OpRecord:
    node_id: int
    op: str
    parent_ids: tuple[int, ...]
    shape: tuple[int, ...]


BuildFn = Callable[[Mapping[str, Tensor]], Mapping[str, Tensor]]


@dataclass
class ComputeGraph:
    """Declared inputs + named parameters + a build function.

    The build function receives a dict containing both the bound inputs
    and the parameters and returns named output tensors. It must be pure
    and deterministic.
    """

    inputs: dict[str, tuple[int, ...]]
    parameters: dict[str, Tensor]
    build: BuildFn
    nodes: list[OpRecord] = field(default_factory=list, repr=False)

    def __post_init__(self):
        outputs = self.build(self._env({k: constant(np.zeros(s)) for k, s in self.inputs.items()}))
        self.nodes = _trace(outputs.values())
        ids = {r.node_id for r in self.nodes}
        for rec in self.nodes:
            for pid in rec.parent_ids:
                if pid not in ids:
                    raise AutodiffError("trace is not topologically closed")

    def _env(self, bound: Mapping[str, Tensor]) -> dict[str, Tensor]:
        env = dict(self.parameters)
        env.update(bound)
        return env


def _trace(outputs) -> list[OpRecord]:
    order: list[Tensor] = []
    seen: set[int] = set()
    stack = [(t, False) for t in outputs]
    while stack:
        node, processed = stack.pop()
        if processed:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in seen:
                stack.append((p, False))
    return [OpRecord(id(t), t.op, tuple(id(p) for p in t._parents), t.data.shape)
            for t in order]


def _bind(graph: ComputeGraph, bindings: Mapping[str, np.ndarray | Tensor]) -> dict[str, Tensor]:
    bound: dict[str, Tensor] = {}
    for name, shape in graph.inputs.items():
        if name not in bindings:
            raise UnboundInputError(f"input '{name}' is not bound")
        value = bindings[name]
        t = value if isinstance(value, Tensor) else constant(np.asarray(value, dtype=np.float64))
        if t.data.shape != tuple(shape):
            raise ShapeError(f"input '{name}' has shape {t.data.shape}, declared {tuple(shape)}")
        bound[name] = t
    return bound


def forward_eval(graph: ComputeGraph, bindings: Mapping[str, np.ndarray | Tensor]) -> dict[str, Tensor]:
    """Evaluate all outputs for the given input bindings.

    Raises ShapeError / UnboundInputError on bad bindings and
    NonFiniteError (naming the op) if any node goes NaN/Inf.
    """
    outputs = dict(graph.build(graph._env(_bind(graph, bindings))))
    for name, t in outputs.items():
        if not np.all(np.isfinite(t.data)):
            raise NonFiniteError(f"{t.op} (output '{name}')")
    return outputs


def backward_grads(graph: ComputeGraph, loss_node: str,
                   bindings: Mapping[str, np.ndarray | Tensor]) -> dict[str, np.ndarray]:
    """Gradients of the scalar loss output w.r.t. every parameter.

    Parameters the loss does not depend on get zero gradients.
    """
    outputs = forward_eval(graph, bindings)
    if loss_node not in outputs:
        raise AutodiffError(f"loss node '{loss_node}' is not an output of the graph")
    loss = outputs[loss_node]
    if loss.data.size != 1:
        raise ShapeError(f"loss node '{loss_node}' is not scalar: shape {loss.data.shape}")
    for p in graph.parameters.values():
        p.zero_grad()
    loss.backward()
    return {name: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
            for name, p in graph.parameters.items()}


def finite_diff_check(graph: ComputeGraph, loss_node: str,
                      bindings: Mapping[str, np.ndarray | Tensor],
                      step: float, samples: int = 100, seed: int = 0) -> float:
    """Max relative error between analytic and central-difference gradients.

    Samples up to `samples` parameter entries (all of them when the model
    is small). Relative error is |analytic - numeric| / (|numeric| + 1e-8).
    """
    if step <= 0:
        raise ValueError("finite-difference step must be > 0")
    analytic = backward_grads(graph, loss_node, bindings)

    def loss_value() -> float:
        out = forward_eval(graph, bindings)[loss_node]
        return float(out.data.reshape(()))

    entries: list[tuple[str, int]] = []
    for name, p in graph.parameters.items():
        entries.extend((name, i) for i in range(p.data.size))
    rng = np.random.default_rng(seed)
    if len(entries) > samples:
        picked = rng.choice(len(entries), size=samples, replace=False)
        entries = [entries[i] for i in picked]

    max_rel = 0.0
    for name, flat_idx in entries:
        p = graph.parameters[name]
        flat = p.data.reshape(-1)
        orig = flat[flat_idx]
        flat[flat_idx] = orig + step
        up = loss_value()
        flat[flat_idx] = orig - step
        down = loss_value()
        flat[flat_idx] = orig
        if not (np.isfinite(up) and np.isfinite(down)):
            raise NonFiniteError("finite-diff perturbed evaluation")
        numeric = (up - down) / (2.0 * step)
        a = analytic[name].reshape(-1)[flat_idx]
        rel = abs(a - numeric) / (abs(numeric) + 1e-8)
        max_rel = max(max_rel, rel)
    return max_rel
