"""
Differentiable classifier: parameters plus the graphs that evaluate them
Used both as the attacked target model and as the discriminator.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
from scipy.special import log_softmax, softmax, xlogy

from diffcore import Graph, ShapeMismatchError, backpropagate, check_shapes_match, evaluate

from .architectures import (
    INPUT,
    LABELS,
    LOGITS,
    REFERENCE,
    cross_entropy_graph,
    divergence_graph,
    init_parameters,
    logits_graph,
    parameter_shapes,
)
from .spec import ModelSpec


@dataclass(frozen=True)
class EpochRecord:
    """Full-train-set loss and macro F1 after an epoch (epoch 0 = before training)"""
    epoch: int
    loss: float
    f1: float


@dataclass(eq=False)
class TrainedClassifier:
    """
    Immutable after construction; safe to query from several threads

    Args:
        spec: architecture
        parameters: named parameter tensors, shapes fixed by the spec
        seed: initialization seed
        history: per-epoch training records
    """
    spec: ModelSpec
    parameters: Dict[str, np.ndarray]
    seed: int = 0
    history: List[EpochRecord] = field(default_factory=list)
    _graphs: Dict[str, Graph] = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        expected = parameter_shapes(self.spec)
        missing = sorted(set(expected) - set(self.parameters))
        extra = sorted(set(self.parameters) - set(expected))
        if missing or extra:
            raise ShapeMismatchError(f"parameters do not match the spec (missing {missing}, unexpected {extra})")
        frozen = {}
        for name, shape in expected.items():
            value = np.array(self.parameters[name], dtype=np.float64)
            check_shapes_match(shape, value.shape, f"parameter '{name}'")
            value.setflags(write=False)
            frozen[name] = value
        self.parameters = frozen
        self._graphs["logits"] = logits_graph(self.spec)
        self._graphs["cross_entropy"], _ = cross_entropy_graph(self.spec)
        self._graphs["divergence"] = divergence_graph(self.spec)

    @property
    def n_classes(self) -> int:
        return self.spec.n_classes

    @property
    def n_parameters(self) -> int:
        return int(sum(p.size for p in self.parameters.values()))

    def with_parameters(self, parameters: Mapping[str, np.ndarray],
                        history: Optional[List[EpochRecord]] = None) -> "TrainedClassifier":
        return TrainedClassifier(spec=self.spec, parameters=dict(parameters), seed=self.seed,
                                 history=list(history if history is not None else self.history))

    def _features(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(1, -1)
        if x.ndim != 2 or x.shape[1] != self.spec.input_length:
            raise ShapeMismatchError(
                f"expected series of length {self.spec.input_length}, got input of shape {x.shape}"
            )
        return x

    def _bindings(self, x: np.ndarray, **extra) -> Dict[str, np.ndarray]:
        bindings = dict(self.parameters)
        bindings[INPUT] = x
        bindings.update(extra)
        return bindings

    def logits(self, x) -> np.ndarray:
        x = self._features(x)
        return evaluate(self._graphs["logits"], self._bindings(x))

    def predict_proba(self, x) -> np.ndarray:
        """Class probabilities, one row per series; dropout is never applied here"""
        return softmax(self.logits(x), axis=1)

    def predict(self, x) -> np.ndarray:
        return np.argmax(self.logits(x), axis=1)

    def loss_and_input_gradient(self, x, labels) -> Tuple[np.ndarray, np.ndarray]:
        """
        Per-row cross-entropy against `labels` and its gradient with respect to the input

        Returns:
            (losses of shape (n,), gradient of shape (n, L))
        """
        x = self._features(x)
        labels = np.asarray(labels, dtype=np.int64).reshape(-1)
        graph = self._graphs["cross_entropy"]
        evaluate(graph, self._bindings(x, **{LABELS: labels}))
        grad = backpropagate(graph, wrt=[INPUT])[INPUT]
        log_probs = log_softmax(graph.cached(LOGITS), axis=1)
        return -log_probs[np.arange(x.shape[0]), labels], grad

    def kl_and_input_gradient(self, x, reference: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Per-row KL(reference || f(x)) and its input gradient"""
        x = self._features(x)
        reference = np.asarray(reference, dtype=np.float64)
        graph = self._graphs["divergence"]
        evaluate(graph, self._bindings(x, **{REFERENCE: reference}))
        grad = backpropagate(graph, wrt=[INPUT])[INPUT]
        log_q = log_softmax(graph.cached(LOGITS), axis=1)
        return np.sum(xlogy(reference, reference) - reference * log_q, axis=1), grad


def build(spec: ModelSpec, seed: int = 0) -> TrainedClassifier:
    """Untrained classifier with deterministic initialization"""
    return TrainedClassifier(spec=spec, parameters=init_parameters(spec, seed), seed=seed)
