"""Sentence-level SGD training and gradient verification."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from indoner.corpus import Sentence, build_vocab
from indoner.embeddings import EmbeddingTable
from indoner.evaluation import score
from indoner.model import (
    Model, ModelConfig, backward, encode, init_model, predict_ids, save_model, sentence_loss,
)

logger = logging.getLogger(__name__)


class TrainingDiverged(FloatingPointError):
    pass


def global_norm(grads: dict[str, np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))


def clip_gradients(grads: dict[str, np.ndarray], clip_norm: float) -> dict[str, np.ndarray]:
    """Rescale so the global L2 norm is at most ``clip_norm``; direction kept."""
    norm = global_norm(grads)
    if clip_norm > 0 and norm > clip_norm:
        scale = clip_norm / norm
        return {k: g * scale for k, g in grads.items()}
    return grads


def sgd_step(model: Model, grads: dict[str, np.ndarray], lr: float, clip_norm: float) -> Model:
    """In-place ``theta -= lr * clip(g)`` over the model's trainable parameters."""
    if lr <= 0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    trainable = set(model.trainable())
    grads = {k: g for k, g in grads.items() if k in trainable}
    bad = [k for k, g in grads.items() if not np.all(np.isfinite(g))]
    if bad:
        raise TrainingDiverged(f"non-finite gradient in {', '.join(bad)}")
    for k, g in clip_gradients(grads, clip_norm).items():
        model.params[k] -= lr * g
    return model


def token_accuracy(model: Model, sentences: Sequence[Sentence]) -> float:
    correct = total = 0
    for sent in sentences:
        enc = encode(model, sent)
        correct += int(np.sum(np.asarray(predict_ids(model, enc)) == enc.tag_ids))
        total += len(enc)
    return correct / total if total else 0.0


def dev_f1(model: Model, sentences: Sequence[Sentence]) -> float:
    pred = [[model.tags[k] for k in predict_ids(model, s)] for s in sentences]
    return score([s.tags for s in sentences], pred, model.config.entity_types).overall.f1


@dataclass
class EpochStats:
    epoch: int
    mean_loss: float
    dev_f1: float | None = None
    train_accuracy: float | None = None


@dataclass
class History:
    epochs: list[EpochStats] = field(default_factory=list)
    best_epoch: int | None = None
    final_train_accuracy: float | None = None

    @property
    def losses(self) -> list[float]:
        return [e.mean_loss for e in self.epochs]


def train(corpus: Sequence[Sentence], config: ModelConfig, pretrained: EmbeddingTable | None = None,
          dev: Sequence[Sentence] | None = None, *, target_accuracy: float | None = None,
          dump_path=None, on_epoch: Callable[[EpochStats], None] | None = None,
          ) -> tuple[Model, History]:
    """Train for ``config.epochs`` passes, one SGD step per sentence.

    Sentence order is reshuffled every epoch from the seed. With ``dev`` the
    returned model is the epoch with the best dev F1 (earliest on ties);
    without it, the last one. ``target_accuracy`` stops early once training
    token accuracy reaches it. A diverging run writes its last state to
    ``dump_path`` (when given) before raising :class:`TrainingDiverged`.
    """
    if not corpus:
        raise ValueError("training corpus is empty")
    vocab = build_vocab(corpus, pretrained.words if pretrained is not None else (),
                        tags=config.tags)
    model = init_model(config, pretrained, list(vocab.words))
    history = History()
    seeds = np.random.SeedSequence(config.seed).spawn(2)
    order_rng = np.random.default_rng(seeds[0])
    drop_rng = np.random.default_rng(seeds[1]) if config.dropout > 0 else None
    encoded = [encode(model, s) for s in corpus]
    best_f1, best = -1.0, None

    for epoch in range(1, config.epochs + 1):
        total = 0.0
        for i in order_rng.permutation(len(encoded)):
            nll, grads = backward(model, encoded[i], rng=drop_rng)
            try:
                if not np.isfinite(nll):
                    raise TrainingDiverged(f"loss is {nll}")
                sgd_step(model, grads, config.learning_rate, config.clip_norm)
            except TrainingDiverged as exc:
                msg = f"epoch {epoch}, sentence {i}: {exc}"
                if dump_path is not None:
                    save_model(model, dump_path)
                    msg += f"; state written to {dump_path}"
                raise TrainingDiverged(msg) from None
            total += nll
        stats = EpochStats(epoch, total / len(encoded))
        if dev:
            stats.dev_f1 = dev_f1(model, dev)
            if stats.dev_f1 > best_f1:
                best_f1, best = stats.dev_f1, model.copy()
                history.best_epoch = epoch
        if target_accuracy is not None:
            stats.train_accuracy = token_accuracy(model, corpus)
        history.epochs.append(stats)
        logger.info("epoch %d loss %.4f dev_f1 %s", epoch, stats.mean_loss, stats.dev_f1)
        if on_epoch is not None:
            on_epoch(stats)
        if target_accuracy is not None and stats.train_accuracy >= target_accuracy:
            break

    if best is not None:
        model = best
    elif history.epochs:
        history.best_epoch = history.epochs[-1].epoch
    history.final_train_accuracy = token_accuracy(model, corpus)
    return model, history


# --------------------------------------------------------------------------
# Finite-difference checking
# --------------------------------------------------------------------------

def relative_error(analytic, numeric, floor: float = 1e-8) -> np.ndarray:
    """``|a - n| / max(|a|, |n|, floor)`` elementwise."""
    analytic, numeric = np.asarray(analytic), np.asarray(numeric)
    return np.abs(analytic - numeric) / np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)


def numeric_gradient(model: Model, sent: Sentence, name: str, eps: float = 1e-5) -> np.ndarray:
    """Central differences of the sentence loss w.r.t. ``model.params[name]``."""
    enc = encode(model, sent)
    theta = model.params[name]
    grad = np.zeros_like(theta)
    for idx in np.ndindex(theta.shape):
        orig = theta[idx]
        theta[idx] = orig + eps
        up = sentence_loss(model, enc)
        theta[idx] = orig - eps
        down = sentence_loss(model, enc)
        theta[idx] = orig
        grad[idx] = (up - down) / (2 * eps)
    return grad


def gradient_check(model: Model, sent: Sentence, eps: float = 1e-5,
                   floor: float = 1e-8) -> dict[str, float]:
    """Max relative error per trainable parameter between backprop and finite differences."""
    _, grads = backward(model, sent)
    errors = {}
    for name in model.trainable():
        numeric = numeric_gradient(model, sent, name, eps)
        errors[name] = float(np.max(relative_error(grads[name], numeric, floor), initial=0.0))
    return errors
