"""Adam training loop over aligned pair tensors."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..augment import LabeledPair
from ..errors import EmptyDataset, MalformedImage, UnsupportedFormat
from ..imagecore import load_image
from .align import align_pair
from .checkpoint import save_checkpoint
from .config import TrainConfig
from .model import PairSimilarityNet, bce_loss


class AdamOptimizer:
    """Adam with bias correction; one slot pair per parameter tensor."""

    def __init__(self, params: dict, cfg: TrainConfig):
        self.cfg = cfg
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        c = self.cfg
        bias1 = 1.0 - c.beta1**self.t
        bias2 = 1.0 - c.beta2**self.t
        for key, g in grads.items():
            m = self.m[key]
            v = self.v[key]
            m *= c.beta1
            m += (1.0 - c.beta1) * g
            v *= c.beta2
            v += (1.0 - c.beta2) * g * g
            update = (m / bias1) / (np.sqrt(v / bias2) + c.eps)
            params[key] -= c.learning_rate * update.astype(params[key].dtype)


def load_pair_tensors(pairs: list[LabeledPair], size: int):
    """Decode + align every manifest pair once, up front.

    Returns (X, y, n_skipped); unreadable pairs are skipped and counted.
    """
    tensors = []
    labels = []
    skipped = 0
    for pair in pairs:
        try:
            a = load_image(pair.image_a)
            b = load_image(pair.image_b)
        except (MalformedImage, UnsupportedFormat, OSError):
            skipped += 1
            continue
        tensors.append(align_pair(a, b, size))
        labels.append(1.0 if pair.label == "similar" else 0.0)
    if not tensors:
        raise EmptyDataset("no readable pairs in manifest")
    return np.stack(tensors), np.array(labels, dtype=np.float32), skipped


def train(model: PairSimilarityNet, pairs: list[LabeledPair],
          cfg: TrainConfig = TrainConfig(), checkpoint_path=None,
          dataset=None, verbose: bool = False, stop=None):
    """Train in place over shuffled mini-batches; returns the history.

    ``dataset`` may supply pre-aligned (X, y) tensors to skip the decode +
    align pass (the tensors are reused across epochs either way). History
    rows carry per-epoch mean training loss and accuracy at threshold 0.5.
    ``stop`` is an optional ``history_row -> bool`` early-stop predicate.
    """
    if dataset is not None:
        X, y = dataset
        skipped = 0
    else:
        if not pairs:
            raise EmptyDataset("empty pair list")
        X, y, skipped = load_pair_tensors(pairs, model.config.input_size)
    X = X.astype(model.dtype)
    y = np.asarray(y, dtype=model.dtype)

    rng = np.random.default_rng(cfg.rng_seed)
    opt = AdamOptimizer(model.params, cfg)
    history = []
    n = X.shape[0]
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        losses = []
        correct = 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            loss, grads = model.loss_and_gradients(X[idx], y[idx])
            opt.step(model.params, grads)
            losses.append(loss * len(idx))
            # eval-mode accuracy (running stats): what a saved model reproduces
            probs = model.forward(X[idx], training=False).reshape(-1)
            correct += int(((probs >= 0.5) == (y[idx] >= 0.5)).sum())
        epoch_loss = float(np.sum(losses) / n)
        accuracy = correct / n
        history.append({"epoch": epoch, "loss": epoch_loss, "accuracy": accuracy})
        if verbose:
            print(f"epoch {epoch}: loss {epoch_loss:.4f} accuracy {accuracy:.3f}")
        if (checkpoint_path is not None and cfg.checkpoint_every
                and epoch % cfg.checkpoint_every == 0):
            save_checkpoint(model, checkpoint_path, history=history)
        if stop is not None and stop(history[-1]):
            break
    if checkpoint_path is not None:
        save_checkpoint(model, checkpoint_path, history=history)
    return history, skipped


def evaluate_pairs(model: PairSimilarityNet, X, y, threshold: float = 0.5):
    """(loss, accuracy) of a trained model on aligned tensors."""
    probs = model.predict_scores(X)
    loss = bce_loss(probs, y)
    accuracy = float(((probs >= threshold) == (np.asarray(y) >= 0.5)).mean())
    return loss, accuracy
