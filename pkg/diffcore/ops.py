"""
Differentiable operations used by the classifiers and attack objectives
Each op computes a forward value and maps an output gradient to input gradients.
Layout conventions: series batches are (n, L), feature maps are (n, L, C)
"""

from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit, log_softmax, softmax, xlogy

from .errors import LabelRangeError, ShapeMismatchError

Grads = Tuple[Optional[np.ndarray], ...]


class Op:
    """
    Base class for graph operations
    forward returns (value, ctx); ctx is whatever backward needs beyond inputs/value
    """

    name = "op"
    arity = 1
    # inputs that never receive a gradient (labels, target distributions, masks)
    constant_inputs: Tuple[int, ...] = ()

    def check(self, inputs: Sequence[np.ndarray], **attrs: Any) -> None:
        pass

    def forward(self, inputs: Sequence[np.ndarray], **attrs: Any) -> Tuple[np.ndarray, Any]:
        raise NotImplementedError

    def backward(self, grad: np.ndarray, inputs: Sequence[np.ndarray], value: np.ndarray,
                 ctx: Any, **attrs: Any) -> Grads:
        raise NotImplementedError


def _shapes(inputs: Sequence[np.ndarray]) -> str:
    return ", ".join(str(tuple(a.shape)) for a in inputs)


class MatMul(Op):
    name = "matmul"
    arity = 2

    def check(self, inputs, **attrs):
        a, b = inputs
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
            raise ShapeMismatchError(f"matmul expects (n, d) @ (d, k), got {_shapes(inputs)}")

    def forward(self, inputs, **attrs):
        a, b = inputs
        return a @ b, None

    def backward(self, grad, inputs, value, ctx, **attrs):
        a, b = inputs
        return grad @ b.T, a.T @ grad


class BiasAdd(Op):
    name = "bias_add"
    arity = 2

    def check(self, inputs, **attrs):
        a, b = inputs
        if b.ndim != 1 or a.shape[-1] != b.shape[0]:
            raise ShapeMismatchError(f"bias_add expects (..., k) + (k,), got {_shapes(inputs)}")

    def forward(self, inputs, **attrs):
        a, b = inputs
        return a + b, None

    def backward(self, grad, inputs, value, ctx, **attrs):
        b = inputs[1]
        return grad, grad.reshape(-1, b.shape[0]).sum(axis=0)


class Conv1d(Op):
    """Same-length 1-D convolution with symmetric zero padding; weights are (k, C_in, C_out)"""

    name = "conv1d"
    arity = 2

    def check(self, inputs, **attrs):
        x, w = inputs
        if x.ndim != 3 or w.ndim != 3 or w.shape[1] != x.shape[2]:
            raise ShapeMismatchError(f"conv1d expects (n, L, C_in) and (k, C_in, C_out), got {_shapes(inputs)}")
        if w.shape[0] % 2 == 0:
            raise ShapeMismatchError(f"conv1d kernel size must be odd, got {w.shape[0]}")

    def forward(self, inputs, **attrs):
        x, w = inputs
        pad = w.shape[0] // 2
        padded = np.pad(x, ((0, 0), (pad, pad), (0, 0)))
        # (n, L, C_in, k)
        windows = sliding_window_view(padded, w.shape[0], axis=1)
        out = np.tensordot(windows, w.transpose(1, 0, 2), axes=([2, 3], [0, 1]))
        return out, windows

    def backward(self, grad, inputs, value, ctx, **attrs):
        x, w = inputs
        windows = ctx
        k = w.shape[0]
        pad = k // 2
        length = x.shape[1]
        grad_w = np.tensordot(windows, grad, axes=([0, 1], [0, 1])).transpose(1, 0, 2)
        grad_padded = np.zeros((x.shape[0], length + 2 * pad, x.shape[2]))
        for j in range(k):
            grad_padded[:, j:j + length, :] += grad @ w[j].T
        return grad_padded[:, pad:pad + length, :], grad_w


class Relu(Op):
    name = "relu"

    def forward(self, inputs, **attrs):
        return np.maximum(inputs[0], 0.0), None

    def backward(self, grad, inputs, value, ctx, **attrs):
        return (grad * (inputs[0] > 0.0),)


class Sigmoid(Op):
    name = "sigmoid"

    def forward(self, inputs, **attrs):
        return expit(inputs[0]), None

    def backward(self, grad, inputs, value, ctx, **attrs):
        return (grad * value * (1.0 - value),)


class Tanh(Op):
    name = "tanh"

    def forward(self, inputs, **attrs):
        return np.tanh(inputs[0]), None

    def backward(self, grad, inputs, value, ctx, **attrs):
        return (grad * (1.0 - value * value),)


class Log(Op):
    name = "log"

    def forward(self, inputs, **attrs):
        # non-positive inputs surface as non-finite values and are reported by the graph
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(inputs[0]), None

    def backward(self, grad, inputs, value, ctx, **attrs):
        return (grad / inputs[0],)


class Softmax(Op):
    name = "softmax"

    def forward(self, inputs, **attrs):
        return softmax(inputs[0], axis=-1), None

    def backward(self, grad, inputs, value, ctx, **attrs):
        inner = np.sum(grad * value, axis=-1, keepdims=True)
        return (value * (grad - inner),)


class Add(Op):
    name = "add"
    arity = 2

    def check(self, inputs, **attrs):
        if inputs[0].shape != inputs[1].shape:
            raise ShapeMismatchError(f"add expects equal shapes, got {_shapes(inputs)}")

    def forward(self, inputs, **attrs):
        return inputs[0] + inputs[1], None

    def backward(self, grad, inputs, value, ctx, **attrs):
        return grad, grad


class Mul(Op):
    name = "mul"
    arity = 2

    def check(self, inputs, **attrs):
        if inputs[0].shape != inputs[1].shape:
            raise ShapeMismatchError(f"mul expects equal shapes, got {_shapes(inputs)}")

    def forward(self, inputs, **attrs):
        return inputs[0] * inputs[1], None

    def backward(self, grad, inputs, value, ctx, **attrs):
        a, b = inputs
        return grad * b, grad * a


class Affine(Op):
    """scale * a + shift with constant scale and shift"""

    name = "affine"

    def forward(self, inputs, scale=1.0, shift=0.0, **attrs):
        return scale * inputs[0] + shift, None

    def backward(self, grad, inputs, value, ctx, scale=1.0, shift=0.0, **attrs):
        return (scale * grad,)


class Sum(Op):
    name = "sum"

    def forward(self, inputs, **attrs):
        return np.asarray(np.sum(inputs[0])), None

    def backward(self, grad, inputs, value, ctx, **attrs):
        return (np.full(inputs[0].shape, float(grad)),)


class MeanTime(Op):
    name = "mean_time"

    def check(self, inputs, **attrs):
        if inputs[0].ndim != 3:
            raise ShapeMismatchError(f"mean_time expects (n, L, C), got {_shapes(inputs)}")

    def forward(self, inputs, **attrs):
        return inputs[0].mean(axis=1), None

    def backward(self, grad, inputs, value, ctx, **attrs):
        x = inputs[0]
        return (np.repeat(grad[:, None, :] / x.shape[1], x.shape[1], axis=1),)


class ExpandChannels(Op):
    name = "expand_channels"

    def check(self, inputs, **attrs):
        if inputs[0].ndim != 2:
            raise ShapeMismatchError(f"expand_channels expects (n, L), got {_shapes(inputs)}")

    def forward(self, inputs, **attrs):
        return inputs[0][:, :, None], None

    def backward(self, grad, inputs, value, ctx, **attrs):
        return (grad[:, :, 0],)


class TimeStep(Op):
    """Column t of an (n, L) batch as an (n, 1) matrix"""

    name = "time_step"

    def check(self, inputs, step=0, **attrs):
        x = inputs[0]
        if x.ndim != 2 or not 0 <= step < x.shape[1]:
            raise ShapeMismatchError(f"time_step {step} out of range for {_shapes(inputs)}")

    def forward(self, inputs, step=0, **attrs):
        return inputs[0][:, step:step + 1], None

    def backward(self, grad, inputs, value, ctx, step=0, **attrs):
        out = np.zeros_like(inputs[0])
        out[:, step:step + 1] = grad
        return (out,)


def _reduce(losses: np.ndarray, reduction: str) -> Tuple[np.ndarray, float]:
    if reduction == "mean":
        return np.asarray(losses.mean()), 1.0 / losses.shape[0]
    return np.asarray(losses.sum()), 1.0


class SoftmaxCrossEntropy(Op):
    """
    Fused softmax + cross-entropy against integer labels
    Output is the sum (or mean) of the per-row losses
    """

    name = "softmax_cross_entropy"
    arity = 2
    constant_inputs = (1,)

    def check(self, inputs, **attrs):
        logits, labels = inputs
        if logits.ndim != 2 or labels.shape != (logits.shape[0],):
            raise ShapeMismatchError(f"cross-entropy expects (n, k) logits and (n,) labels, got {_shapes(inputs)}")
        if labels.size and (labels.min() < 0 or labels.max() >= logits.shape[1]):
            raise LabelRangeError(f"labels must lie in [0, {logits.shape[1]})")

    def forward(self, inputs, reduction="sum", **attrs):
        logits, labels = inputs
        idx = labels.astype(np.int64)
        log_probs = log_softmax(logits, axis=1)
        losses = -log_probs[np.arange(logits.shape[0]), idx]
        value, factor = _reduce(losses, reduction)
        return value, (np.exp(log_probs), idx, factor)

    def backward(self, grad, inputs, value, ctx, reduction="sum", **attrs):
        probs, idx, factor = ctx
        delta = probs.copy()
        delta[np.arange(delta.shape[0]), idx] -= 1.0
        return float(grad) * factor * delta, None


class SoftmaxKL(Op):
    """
    Fused KL(P || softmax(logits)) against a fixed reference distribution P
    Output is the sum (or mean) of the per-row divergences
    """

    name = "softmax_kl"
    arity = 2
    constant_inputs = (1,)

    def check(self, inputs, **attrs):
        logits, target = inputs
        if logits.ndim != 2 or target.shape != logits.shape:
            raise ShapeMismatchError(f"softmax_kl expects matching (n, k) operands, got {_shapes(inputs)}")

    def forward(self, inputs, reduction="sum", **attrs):
        logits, target = inputs
        log_q = log_softmax(logits, axis=1)
        divergences = np.sum(xlogy(target, target) - target * log_q, axis=1)
        value, factor = _reduce(divergences, reduction)
        return value, (np.exp(log_q), factor)

    def backward(self, grad, inputs, value, ctx, reduction="sum", **attrs):
        q, factor = ctx
        target = inputs[1]
        return float(grad) * factor * (q - target), None


OPS: Dict[str, Op] = {
    op.name: op
    for op in (
        MatMul(), BiasAdd(), Conv1d(), Relu(), Sigmoid(), Tanh(), Log(), Softmax(),
        Add(), Mul(), Affine(), Sum(), MeanTime(), ExpandChannels(), TimeStep(),
        SoftmaxCrossEntropy(), SoftmaxKL(),
    )
}
