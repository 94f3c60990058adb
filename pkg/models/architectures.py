"""
Graph construction and parameter initialization for the three classifier families

mlp:       dense -> relu (-> dropout) per hidden layer, dense head
rescnn:    conv -> bias -> relu blocks with a residual add wherever a block keeps
           its channel count, mean-over-time pooling (-> dropout), dense head
recurrent: one GRU layer unrolled over time, final state (-> dropout), dense head
"""

from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from diffcore import Graph, GraphBuilder

from .spec import ModelFamily, ModelSpec

INPUT = "x"
LABELS = "y"
REFERENCE = "p"
LOGITS = "logits"

GRU_GATES = ("z", "r", "h")


@dataclass(frozen=True)
class DropoutSite:
    """Constant mask leaf applied in training graphs; shape is (batch, width)"""
    name: str
    width: int


def parameter_shapes(spec: ModelSpec) -> Dict[str, Tuple[int, ...]]:
    """Parameter names and shapes in initialization order"""
    shapes: Dict[str, Tuple[int, ...]] = {}
    if spec.family == ModelFamily.MLP:
        fan_in = spec.input_length
        for i, width in enumerate(spec.widths):
            shapes[f"dense{i}.weight"] = (fan_in, width)
            shapes[f"dense{i}.bias"] = (width,)
            fan_in = width
    elif spec.family == ModelFamily.RESCNN:
        channels = 1
        for i, (width, k) in enumerate(zip(spec.widths, spec.kernel_sizes)):
            shapes[f"conv{i}.weight"] = (k, channels, width)
            shapes[f"conv{i}.bias"] = (width,)
            channels = width
        fan_in = channels
    else:
        hidden = spec.widths[0]
        for gate in GRU_GATES:
            shapes[f"gru.w{gate}"] = (1, hidden)
            shapes[f"gru.u{gate}"] = (hidden, hidden)
            shapes[f"gru.b{gate}"] = (hidden,)
        fan_in = hidden
    shapes["head.weight"] = (fan_in, spec.n_classes)
    shapes["head.bias"] = (spec.n_classes,)
    return shapes


def init_parameters(spec: ModelSpec, seed: int) -> Dict[str, np.ndarray]:
    """
    Scaled-uniform fan-in initialization

    ReLU layers draw from U(-sqrt(6/fan_in), sqrt(6/fan_in)), gated layers from
    U(-sqrt(3/fan_in), sqrt(3/fan_in)). Hidden biases and the whole head start at zero,
    so an untrained model predicts the uniform distribution.
    """
    rng = np.random.default_rng(seed)
    params: Dict[str, np.ndarray] = {}
    for name, shape in parameter_shapes(spec).items():
        if name.startswith("head.") or name.endswith("bias") or name.startswith("gru.b"):
            params[name] = np.zeros(shape)
            continue
        if name.startswith("conv"):
            fan_in = shape[0] * shape[1]
        else:
            fan_in = shape[0]
        gain = 3.0 if name.startswith("gru.") else 6.0
        limit = np.sqrt(gain / fan_in)
        params[name] = rng.uniform(-limit, limit, size=shape)
    return params


def _dropout(g: GraphBuilder, node: int, width: int, sites: List[DropoutSite], training: bool,
             rate: float) -> int:
    if not training or rate <= 0.0:
        return node
    site = DropoutSite(name=f"mask{len(sites)}", width=width)
    sites.append(site)
    return g.mul(node, g.constant(site.name))


def _mlp(g: GraphBuilder, spec: ModelSpec, x: int, training: bool, sites: List[DropoutSite]) -> Tuple[int, int]:
    h = x
    for i, width in enumerate(spec.widths):
        h = g.relu(g.dense(h, g.leaf(f"dense{i}.weight"), g.leaf(f"dense{i}.bias")))
        h = _dropout(g, h, width, sites, training, spec.dropout)
    return h, spec.widths[-1]


def _rescnn(g: GraphBuilder, spec: ModelSpec, x: int, training: bool, sites: List[DropoutSite]) -> Tuple[int, int]:
    h = g.expand_channels(x)
    channels = 1
    for i, width in enumerate(spec.widths):
        out = g.bias_add(g.conv1d(h, g.leaf(f"conv{i}.weight")), g.leaf(f"conv{i}.bias"))
        if i > 0 and width == channels:
            out = g.add(out, h)
        h = g.relu(out)
        channels = width
    pooled = _dropout(g, g.mean_time(h), channels, sites, training, spec.dropout)
    return pooled, channels


def _recurrent(g: GraphBuilder, spec: ModelSpec, x: int, training: bool,
               sites: List[DropoutSite]) -> Tuple[int, int]:
    hidden = spec.widths[0]
    w = {gate: g.leaf(f"gru.w{gate}") for gate in GRU_GATES}
    u = {gate: g.leaf(f"gru.u{gate}") for gate in GRU_GATES}
    b = {gate: g.leaf(f"gru.b{gate}") for gate in GRU_GATES}

    def project(x_t: int, gate: str) -> int:
        return g.bias_add(g.matmul(x_t, w[gate]), b[gate])

    # h_0 = 0, so the first step reduces to (1 - z) * n
    x_0 = g.time_step(x, 0)
    z = g.sigmoid(project(x_0, "z"))
    h = g.mul(g.affine(z, scale=-1.0, shift=1.0), g.tanh(project(x_0, "h")))
    for t in range(1, spec.input_length):
        x_t = g.time_step(x, t)
        z = g.sigmoid(g.add(project(x_t, "z"), g.matmul(h, u["z"])))
        r = g.sigmoid(g.add(project(x_t, "r"), g.matmul(h, u["r"])))
        n = g.tanh(g.add(project(x_t, "h"), g.matmul(g.mul(r, h), u["h"])))
        # h' = n + z * (h - n)
        h = g.add(n, g.mul(z, g.add(h, g.scale(n, -1.0))))
    return _dropout(g, h, hidden, sites, training, spec.dropout), hidden


BODIES = {
    ModelFamily.MLP: _mlp,
    ModelFamily.RESCNN: _rescnn,
    ModelFamily.RECURRENT: _recurrent,
}


def build_logits(g: GraphBuilder, spec: ModelSpec, training: bool = False) -> Tuple[int, List[DropoutSite]]:
    """Add the classifier body and head to `g`; returns the logits node and any dropout sites"""
    sites: List[DropoutSite] = []
    features, _ = BODIES[spec.family](g, spec, g.leaf(INPUT), training, sites)
    logits = g.dense(features, g.leaf("head.weight"), g.leaf("head.bias"))
    return g.name(logits, LOGITS), sites


def logits_graph(spec: ModelSpec) -> Graph:
    g = GraphBuilder()
    logits, _ = build_logits(g, spec)
    return g.build(logits)


def cross_entropy_graph(spec: ModelSpec, training: bool = False) -> Tuple[Graph, List[DropoutSite]]:
    """Mean cross-entropy in training mode (with dropout masks), summed per-row losses otherwise"""
    g = GraphBuilder()
    logits, sites = build_logits(g, spec, training=training)
    loss = g.softmax_cross_entropy(logits, g.constant(LABELS), reduction="mean" if training else "sum")
    return g.build(loss), sites


def divergence_graph(spec: ModelSpec) -> Graph:
    """Summed KL(reference || softmax(logits)) over rows"""
    g = GraphBuilder()
    logits, _ = build_logits(g, spec)
    return g.build(g.softmax_kl(logits, g.constant(REFERENCE)))
