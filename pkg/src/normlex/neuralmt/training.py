"""ADAM training loop with dev-loss-driven learning-rate halving.

Each epoch runs seeded, shuffled mini-batches (``config.batch_size``
sources per step, the last batch may be smaller), then evaluates the mean
multi-target loss on the dev set.  When the dev loss rises above the
previous epoch's value the learning rate is halved for subsequent epochs.
Training stops at ``config.max_epochs`` or once the learning rate falls
below ``config.min_lr``; the returned model carries the parameters of the
best dev epoch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NormlexError
from .config import ModelConfig
from .model import (
    TrainingExample,
    TranslationModel,
    decode_greedy,
    loss_and_gradients,
    multi_target_loss,
    new_model,
    zero_gradients,
)
from .vocab import CharVocab


class EmptyDataset(NormlexError):
    """Training or development set is empty."""


@dataclass(frozen=True, slots=True)
class EpochStats:
    epoch: int
    train_loss: float
    dev_loss: float
    lr: float


@dataclass
class TrainState:
    model: TranslationModel
    adam_m: dict[str, np.ndarray]
    adam_v: dict[str, np.ndarray]
    step: int
    current_lr: float
    best_dev_loss: float
    best_params: dict[str, np.ndarray]
    epoch: int


@dataclass
class TrainResult:
    model: TranslationModel
    history: list[EpochStats] = field(default_factory=list)


def next_lr(current_lr: float, prev_dev_loss: float | None, new_dev_loss: float) -> float:
    """Halve the learning rate when the dev loss got worse."""
    if prev_dev_loss is not None and new_dev_loss > prev_dev_loss:
        return current_lr / 2.0
    return current_lr


def _adam_update(state: TrainState, grads: dict[str, np.ndarray], config: ModelConfig) -> None:
    state.step += 1
    b1, b2 = config.adam_beta1, config.adam_beta2
    correction1 = 1.0 - b1**state.step
    correction2 = 1.0 - b2**state.step
    lr = state.current_lr
    for name, grad in grads.items():
        m = state.adam_m[name]
        v = state.adam_v[name]
        m *= b1
        m += (1.0 - b1) * grad
        v *= b2
        v += (1.0 - b2) * grad * grad
        state.model.params[name] -= lr * (m / correction1) / (
            np.sqrt(v / correction2) + config.adam_eps
        )


def mean_multi_target_loss(model: TranslationModel, examples: list[TrainingExample]) -> float:
    if not examples:
        raise EmptyDataset("no examples to evaluate")
    return float(np.mean([multi_target_loss(model, ex) for ex in examples]))


def exact_match_rate(model: TranslationModel, examples: list[TrainingExample]) -> float:
    """Fraction of examples whose greedy decode equals an admissible target."""
    if not examples:
        raise EmptyDataset("no examples to evaluate")
    hits = sum(
        1
        for ex in examples
        if decode_greedy(model, ex.source) in {t.lower() for t in ex.targets}
    )
    return hits / len(examples)


def train(
    examples: list[TrainingExample],
    dev: list[TrainingExample],
    config: ModelConfig,
) -> TrainResult:
    """Train a fresh model; deterministic given config.seed and the data."""
    if not examples:
        raise EmptyDataset("empty training set")
    if not dev:
        raise EmptyDataset("empty development set")

    source_vocab = CharVocab.build(ex.source for ex in examples)
    target_vocab = CharVocab.build(t for ex in examples for t in ex.targets)
    model = new_model(config, source_vocab, target_vocab)

    state = TrainState(
        model=model,
        adam_m=zero_gradients(model),
        adam_v=zero_gradients(model),
        step=0,
        current_lr=config.initial_lr,
        best_dev_loss=float("inf"),
        best_params={k: p.copy() for k, p in model.params.items()},
        epoch=0,
    )
    rng = np.random.default_rng(config.seed)
    history: list[EpochStats] = []
    prev_dev_loss: float | None = None

    for epoch in range(1, config.max_epochs + 1):
        state.epoch = epoch
        order = rng.permutation(len(examples))
        epoch_losses = []
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            batch_grads = zero_gradients(model)
            for idx in batch:
                loss, grads = loss_and_gradients(model, examples[idx])
                epoch_losses.append(loss)
                for name, grad in grads.items():
                    batch_grads[name] += grad
            inv = 1.0 / len(batch)
            for name in batch_grads:
                batch_grads[name] *= inv
            _adam_update(state, batch_grads, config)

        train_loss = float(np.mean(epoch_losses))
        dev_loss = mean_multi_target_loss(model, dev)
        history.append(
            EpochStats(epoch=epoch, train_loss=train_loss, dev_loss=dev_loss, lr=state.current_lr)
        )
        if dev_loss < state.best_dev_loss:
            state.best_dev_loss = dev_loss
            state.best_params = {k: p.copy() for k, p in model.params.items()}
        state.current_lr = next_lr(state.current_lr, prev_dev_loss, dev_loss)
        prev_dev_loss = dev_loss
        if state.current_lr < config.min_lr:
            break

    model.params = state.best_params
    return TrainResult(model=model, history=history)
