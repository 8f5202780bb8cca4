"""Editor training: Adam, validation-perplexity schedule, early stopping.

The learning rate halves whenever validation perplexity goes up after an
epoch, and training stops once it has gone up in two successive epochs (or
at the epoch cap). The returned parameters are the best-validation snapshot,
not the last one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Vocab
from .editor import (
    Example,
    Hyperparams,
    ModelParams,
    encode_quadruple,
    init_params,
    loss_and_grads,
    nll,
)
from .retrieval import Quadruple


class TrainingDiverged(RuntimeError):
    """Raised when the loss stops being finite."""


class ValidationSchedule:
    """Learning-rate and stopping policy driven by validation perplexity.

    The rate halves whenever perplexity increases against the previous
    epoch; two increases in a row stop training.
    """

    def __init__(self, lr: float):
        self.lr = lr
        self.prev = math.inf
        self.increases_in_a_row = 0

    def update(self, val_perplexity: float) -> bool:
        """Record one epoch's perplexity; returns True when training should stop."""
        if val_perplexity > self.prev:
            self.increases_in_a_row += 1
            self.lr *= 0.5
        else:
            self.increases_in_a_row = 0
        self.prev = val_perplexity
        return self.increases_in_a_row >= 2


class Adam:
    """Adam over named parameter arrays, updated in place."""

    def __init__(self, params, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0
        self.m = {name: np.zeros_like(arr) for name, arr in params.named_arrays()}
        self.v = {name: np.zeros_like(arr) for name, arr in params.named_arrays()}

    def step(self, params, grads, lr: float) -> None:
        self.t += 1
        bias1 = 1.0 - self.beta1**self.t
        bias2 = 1.0 - self.beta2**self.t
        grad_map = dict(grads.named_arrays())
        for name, arr in params.named_arrays():
            g = grad_map[name]
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            arr -= lr * (m / bias1) / (np.sqrt(v / bias2) + self.eps)


def clip_gradients(grads, max_norm: float) -> float:
    """Global-norm clipping across every block; returns the pre-clip norm."""
    total = 0.0
    for _, arr in grads.named_arrays():
        total += float(np.sum(arr.astype(np.float64) ** 2))
    norm = math.sqrt(total)
    if max_norm > 0 and norm > max_norm:
        scale = max_norm / norm
        for _, arr in grads.named_arrays():
            arr *= scale
    return norm


def perplexity(params: ModelParams, examples: list[Example], ablation: str) -> float:
    """Token-level perplexity: exp of the mean per-token NLL."""
    return math.exp(nll(params, examples, ablation))


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    val_perplexity: float
    lr: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "epoch": self.epoch,
                "train_loss": self.train_loss,
                "val_perplexity": self.val_perplexity,
                "lr": self.lr,
            }
        )


@dataclass
class TrainResult:
    params: ModelParams
    log: list[EpochStats] = field(default_factory=list)
    best_epoch: int = -1
    best_val_perplexity: float = math.inf


def encode_quadruples(quads: list[Quadruple], vocab: Vocab) -> list[Example]:
    return [encode_quadruple(q, vocab) for q in quads]


def train(
    train_quads: list[Quadruple],
    val_quads: list[Quadruple],
    vocab: Vocab,
    hp: Hyperparams,
    params: ModelParams | None = None,
    log_path: str | Path | None = None,
) -> TrainResult:
    """Optimize the editor on quadruples; returns best-validation parameters.

    Deterministic for a fixed seed: shuffling, initialization, and update
    order all derive from ``hp.seed`` and run single-threaded.
    """
    if not train_quads or not val_quads:
        raise ValueError("train and validation sets must both be nonempty")
    train_examples = encode_quadruples(train_quads, vocab)
    val_examples = encode_quadruples(val_quads, vocab)
    if params is None:
        params = init_params(hp)
    optimizer = Adam(params)
    rng = np.random.default_rng(hp.seed + 1)
    schedule = ValidationSchedule(hp.lr_init)
    result = TrainResult(params=params.copy())
    log_fh = open(log_path, "a", encoding="utf-8") if log_path else None
    try:
        for epoch in range(1, hp.max_epochs + 1):
            order = rng.permutation(len(train_examples))
            epoch_loss, epoch_tokens = 0.0, 0
            for start in range(0, len(order), hp.batch_size):
                batch = [train_examples[i] for i in order[start : start + hp.batch_size]]
                loss, grads = loss_and_grads(params, batch, hp.ablation)
                if not math.isfinite(loss):
                    raise TrainingDiverged(
                        f"non-finite loss {loss} at epoch {epoch}, step {start // hp.batch_size}"
                    )
                clip_gradients(grads, hp.grad_clip_norm)
                optimizer.step(params, grads, schedule.lr)
                batch_tokens = sum(len(ex.target_ids) for ex in batch)
                epoch_loss += loss * batch_tokens
                epoch_tokens += batch_tokens
            train_loss = epoch_loss / epoch_tokens
            val_ppl = perplexity(params, val_examples, hp.ablation)
            stats = EpochStats(
                epoch=epoch, train_loss=train_loss, val_perplexity=val_ppl, lr=schedule.lr
            )
            result.log.append(stats)
            if log_fh:
                log_fh.write(stats.to_json() + "\n")
                log_fh.flush()
            if val_ppl < result.best_val_perplexity:
                result.best_val_perplexity = val_ppl
                result.best_epoch = epoch
                result.params = params.copy()
            if schedule.update(val_ppl):
                break
    finally:
        if log_fh:
            log_fh.close()
    return result
