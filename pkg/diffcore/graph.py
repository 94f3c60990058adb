"""
Computation graphs with reverse-mode differentiation
A graph is built once by GraphBuilder and evaluated many times with fresh bindings.
Forward caches live in per-thread scratch space, so one graph can serve several workers.
"""

import threading
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

import numpy as np

from .errors import (
    InvalidStepError,
    MissingForwardCacheError,
    NonScalarOutputError,
    NumericalError,
    ShapeMismatchError,
    UnboundLeafError,
)
from .ops import OPS

Tensor = np.ndarray

LEAF = "leaf"


def as_tensor(value: Any) -> Tensor:
    """Copy a value into a 64-bit real tensor"""
    return np.array(value, dtype=np.float64)


@dataclass(frozen=True)
class Node:
    """Single operation record: op kind, input node indices and constant attributes"""
    index: int
    op: str
    inputs: Tuple[int, ...] = ()
    attrs: Tuple[Tuple[str, Any], ...] = ()
    name: Optional[str] = None

    @property
    def params(self) -> Dict[str, Any]:
        return dict(self.attrs)


@dataclass
class ForwardCache:
    """Forward values and op contexts of one evaluation"""
    values: List[Tensor]
    contexts: List[Any]


@dataclass(frozen=True, eq=False)
class Graph:
    """
    Topologically ordered, immutable operation graph
    Leaves are addressed by name; `differentiable` lists the leaves gradients are reported for.
    """
    nodes: Tuple[Node, ...]
    leaves: Mapping[str, int]
    differentiable: FrozenSet[str]
    output: int
    named: Mapping[str, int] = field(default_factory=dict)
    _scratch: threading.local = field(default_factory=threading.local, repr=False)

    def forward(self, bindings: Mapping[str, Any]) -> ForwardCache:
        """Run every node once; does not touch the per-thread cache"""
        values: List[Optional[Tensor]] = [None] * len(self.nodes)
        contexts: List[Any] = [None] * len(self.nodes)
        for node in self.nodes:
            if node.op == LEAF:
                if node.name not in bindings:
                    raise UnboundLeafError(f"leaf '{node.name}' is not bound")
                value = as_tensor(bindings[node.name])
                if not np.all(np.isfinite(value)):
                    raise NumericalError(f"leaf '{node.name}' holds non-finite values")
                values[node.index] = value
                continue
            op = OPS[node.op]
            inputs = [values[i] for i in node.inputs]
            params = node.params
            op.check(inputs, **params)
            value, ctx = op.forward(inputs, **params)
            if not np.all(np.isfinite(value)):
                raise NumericalError(f"non-finite value at node {node.index} ({node.op})")
            values[node.index] = value
            contexts[node.index] = ctx
        return ForwardCache(values=values, contexts=contexts)

    @property
    def last_forward(self) -> Optional[ForwardCache]:
        return getattr(self._scratch, "cache", None)

    def cached(self, name: str) -> Tensor:
        """Forward value of a named node from this thread's last evaluate call"""
        cache = self.last_forward
        if cache is None:
            raise MissingForwardCacheError("evaluate has not run on this thread")
        return cache.values[self.named[name]]


class GraphBuilder:
    """
    Records operations in call order, which is a valid topological order

    Example:
        g = GraphBuilder()
        x = g.leaf("x")
        graph = g.build(g.sum(g.mul(x, x)))
    """

    def __init__(self):
        self._nodes: List[Node] = []
        self._leaves: Dict[str, int] = {}
        self._differentiable: set = set()
        self._named: Dict[str, int] = {}

    def _add(self, op: str, *inputs: int, **attrs: Any) -> int:
        if op not in OPS:
            raise ValueError(f"unknown op '{op}'")
        for i in inputs:
            if not 0 <= i < len(self._nodes):
                raise ValueError(f"input node {i} does not precede '{op}'")
        index = len(self._nodes)
        self._nodes.append(Node(index=index, op=op, inputs=tuple(inputs), attrs=tuple(sorted(attrs.items()))))
        return index

    def leaf(self, name: str, differentiable: bool = True) -> int:
        if name in self._leaves:
            return self._leaves[name]
        index = len(self._nodes)
        self._nodes.append(Node(index=index, op=LEAF, name=name))
        self._leaves[name] = index
        if differentiable:
            self._differentiable.add(name)
        return index

    def constant(self, name: str) -> int:
        """Leaf that is bound per call but never differentiated (labels, masks)"""
        return self.leaf(name, differentiable=False)

    def name(self, node: int, label: str) -> int:
        self._named[label] = node
        return node

    def matmul(self, a: int, b: int) -> int:
        return self._add("matmul", a, b)

    def bias_add(self, a: int, b: int) -> int:
        return self._add("bias_add", a, b)

    def dense(self, x: int, weight: int, bias: int) -> int:
        return self.bias_add(self.matmul(x, weight), bias)

    def conv1d(self, x: int, weight: int) -> int:
        return self._add("conv1d", x, weight)

    def relu(self, a: int) -> int:
        return self._add("relu", a)

    def sigmoid(self, a: int) -> int:
        return self._add("sigmoid", a)

    def tanh(self, a: int) -> int:
        return self._add("tanh", a)

    def log(self, a: int) -> int:
        return self._add("log", a)

    def softmax(self, a: int) -> int:
        return self._add("softmax", a)

    def add(self, a: int, b: int) -> int:
        return self._add("add", a, b)

    def mul(self, a: int, b: int) -> int:
        return self._add("mul", a, b)

    def scale(self, a: int, factor: float) -> int:
        return self._add("affine", a, scale=float(factor), shift=0.0)

    def affine(self, a: int, scale: float, shift: float) -> int:
        return self._add("affine", a, scale=float(scale), shift=float(shift))

    def sum(self, a: int) -> int:
        return self._add("sum", a)

    def mean_time(self, a: int) -> int:
        return self._add("mean_time", a)

    def expand_channels(self, a: int) -> int:
        return self._add("expand_channels", a)

    def time_step(self, a: int, step: int) -> int:
        return self._add("time_step", a, step=int(step))

    def softmax_cross_entropy(self, logits: int, labels: int, reduction: str = "sum") -> int:
        return self._add("softmax_cross_entropy", logits, labels, reduction=reduction)

    def softmax_kl(self, logits: int, target: int, reduction: str = "sum") -> int:
        return self._add("softmax_kl", logits, target, reduction=reduction)

    def build(self, output: int) -> Graph:
        return Graph(
            nodes=tuple(self._nodes),
            leaves=dict(self._leaves),
            differentiable=frozenset(self._differentiable),
            output=output,
            named=dict(self._named),
        )


def evaluate(graph: Graph, bindings: Mapping[str, Any]) -> Tensor:
    """
    Evaluate the graph output for the given leaf bindings
    The forward cache replaces this thread's previous one for the same graph.
    """
    cache = graph.forward(bindings)
    graph._scratch.cache = cache
    return cache.values[graph.output]


def _scalar(value: Tensor) -> float:
    if value.size != 1:
        raise NonScalarOutputError(f"graph output has shape {value.shape}, expected a scalar")
    return float(value.reshape(()))


def backpropagate(graph: Graph, wrt: Optional[Iterable[str]] = None) -> Dict[str, Tensor]:
    """
    Gradient of the scalar output with respect to differentiable leaves
    `wrt` restricts the work to a subset of leaves (e.g. only the input series).
    """
    cache = graph.last_forward
    if cache is None:
        raise MissingForwardCacheError("call evaluate before backpropagate")
    _scalar(cache.values[graph.output])

    targets = set(graph.differentiable if wrt is None else wrt)
    unknown = targets - set(graph.differentiable)
    if unknown:
        raise ValueError(f"not differentiable leaves: {sorted(unknown)}")

    needs = [False] * len(graph.nodes)
    for node in graph.nodes:
        if node.op == LEAF:
            needs[node.index] = node.name in targets
        else:
            constant = OPS[node.op].constant_inputs
            needs[node.index] = any(needs[i] for k, i in enumerate(node.inputs) if k not in constant)

    grads: List[Optional[Tensor]] = [None] * len(graph.nodes)
    grads[graph.output] = np.ones_like(cache.values[graph.output])
    for node in reversed(graph.nodes):
        grad = grads[node.index]
        if node.op == LEAF or grad is None or not needs[node.index]:
            continue
        op = OPS[node.op]
        inputs = [cache.values[i] for i in node.inputs]
        input_grads = op.backward(grad, inputs, cache.values[node.index], cache.contexts[node.index], **node.params)
        for k, (i, g) in enumerate(zip(node.inputs, input_grads)):
            if g is None or k in op.constant_inputs or not needs[i]:
                continue
            grads[i] = g if grads[i] is None else grads[i] + g

    result = {}
    for name in sorted(targets):
        index = graph.leaves[name]
        grad = grads[index]
        result[name] = np.zeros_like(cache.values[index]) if grad is None else np.asarray(grad, dtype=np.float64)
    return result


def finite_difference_gradient(graph: Graph, bindings: Mapping[str, Any], leaf: str, h: float = 1e-5) -> Tensor:
    """Central-difference estimate of d(output)/d(leaf), one coordinate at a time"""
    if not h > 0:
        raise InvalidStepError(f"step must be positive, got {h}")
    if leaf not in graph.leaves:
        raise UnboundLeafError(f"graph has no leaf '{leaf}'")
    if leaf not in bindings:
        raise UnboundLeafError(f"leaf '{leaf}' is not bound")
    point = as_tensor(bindings[leaf])
    grad = np.zeros_like(point)
    shifted = dict(bindings)
    for idx in np.ndindex(point.shape):
        original = point[idx]
        point[idx] = original + h
        shifted[leaf] = point
        upper = _scalar(graph.forward(shifted).values[graph.output])
        point[idx] = original - h
        lower = _scalar(graph.forward(shifted).values[graph.output])
        point[idx] = original
        grad[idx] = (upper - lower) / (2.0 * h)
    return grad


def check_shapes_match(expected: Tuple[int, ...], actual: Tuple[int, ...], what: str) -> None:
    if tuple(expected) != tuple(actual):
        raise ShapeMismatchError(f"{what}: expected shape {tuple(expected)}, got {tuple(actual)}")
