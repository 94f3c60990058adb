"""
Minibatch Adam training with cross-entropy loss
"""

from typing import Dict, List

import numpy as np
from loguru import logger
from scipy.special import log_softmax
from sklearn.metrics import f1_score

from data.series import EmptyDatasetError, LabeledSeriesSet
from diffcore import LabelRangeError, ShapeMismatchError, backpropagate, evaluate

from .architectures import INPUT, LABELS, cross_entropy_graph
from .classifier import EpochRecord, TrainedClassifier
from .spec import TrainConfig

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class AdamState:
    """First and second moment estimates for every parameter"""

    def __init__(self, parameters: Dict[str, np.ndarray]):
        self.step = 0
        self.m = {k: np.zeros_like(v) for k, v in parameters.items()}
        self.v = {k: np.zeros_like(v) for k, v in parameters.items()}

    def update(self, parameters: Dict[str, np.ndarray], grads: Dict[str, np.ndarray],
               learning_rate: float, weight_decay: float) -> None:
        self.step += 1
        correction1 = 1.0 - ADAM_BETA1 ** self.step
        correction2 = 1.0 - ADAM_BETA2 ** self.step
        for name, value in parameters.items():
            grad = grads[name] + weight_decay * value
            self.m[name] = ADAM_BETA1 * self.m[name] + (1.0 - ADAM_BETA1) * grad
            self.v[name] = ADAM_BETA2 * self.v[name] + (1.0 - ADAM_BETA2) * grad * grad
            m_hat = self.m[name] / correction1
            v_hat = self.v[name] / correction2
            parameters[name] = value - learning_rate * m_hat / (np.sqrt(v_hat) + ADAM_EPS)


def evaluate_epoch(model: TrainedClassifier, data: LabeledSeriesSet, epoch: int) -> EpochRecord:
    logits = model.logits(data.features)
    loss = -log_softmax(logits, axis=1)[np.arange(data.n), data.labels].mean()
    f1 = f1_score(data.labels, np.argmax(logits, axis=1), average="macro", zero_division=0)
    return EpochRecord(epoch=epoch, loss=float(loss), f1=float(f1))


def _validate(model: TrainedClassifier, train: LabeledSeriesSet) -> None:
    if train.n == 0:
        raise EmptyDatasetError("cannot fit on an empty dataset")
    if train.length != model.spec.input_length:
        raise ShapeMismatchError(f"model expects length {model.spec.input_length}, dataset has {train.length}")
    if train.labels.min() < 0 or train.labels.max() >= model.n_classes:
        raise LabelRangeError(
            f"labels of '{train.name}' must lie in [0, {model.n_classes}), "
            f"got [{train.labels.min()}, {train.labels.max()}]"
        )


def fit(model: TrainedClassifier, train: LabeledSeriesSet, cfg: TrainConfig) -> TrainedClassifier:
    """
    Train a copy of `model` on `train`

    Args:
        model: starting point (untrained, or a discriminator being finetuned)
        train: labeled series
        cfg: optimizer settings; shuffling and dropout masks derive from cfg.seed

    Returns:
        New TrainedClassifier; history continues the starting model's history
    """
    _validate(model, train)
    graph, sites = cross_entropy_graph(model.spec, training=True)
    rng = np.random.default_rng(cfg.seed)
    params = {k: v.copy() for k, v in model.parameters.items()}
    names = sorted(params)
    optimizer = AdamState(params)
    rate = model.spec.dropout

    offset = model.history[-1].epoch if model.history else 0
    history: List[EpochRecord] = list(model.history)
    if not history:
        history.append(evaluate_epoch(model, train, 0))
    best_loss = history[-1].loss
    stale = 0

    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(train.n)
        for start in range(0, train.n, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            bindings = dict(params)
            bindings[INPUT] = train.features[batch]
            bindings[LABELS] = train.labels[batch]
            for site in sites:
                keep = rng.random((batch.shape[0], site.width)) >= rate
                bindings[site.name] = keep / (1.0 - rate)
            evaluate(graph, bindings)
            optimizer.update(params, backpropagate(graph, wrt=names), cfg.learning_rate, cfg.weight_decay)

        record = evaluate_epoch(model.with_parameters(params, []), train, offset + epoch)
        history.append(record)
        logger.debug(f"[{train.name}] epoch {record.epoch}: loss={record.loss:.5f} f1={record.f1:.4f}")

        if cfg.patience:
            if record.loss < best_loss:
                best_loss, stale = record.loss, 0
            else:
                stale += 1
                if stale >= cfg.patience:
                    logger.debug(f"[{train.name}] early stop after epoch {record.epoch}")
                    break

    trained = model.with_parameters(params, history)
    logger.info(f"Trained {model.spec.family.value} on '{train.name}': "
                f"loss {history[0].loss:.4f} -> {history[-1].loss:.4f}, f1={history[-1].f1:.4f}")
    return trained
