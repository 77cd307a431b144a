"""The pair-similarity network: parameters, forward pass, backpropagation."""

from __future__ import annotations

import numpy as np

from ..errors import LengthMismatch, ShapeMismatch
from .config import ModelConfig
from . import ops

_CLAMP = 1e-7


def bce_loss(pred, labels) -> float:
    """Binary cross entropy, mean over the batch; predictions are clamped
    to [1e-7, 1 - 1e-7] before the logs for numeric stability."""
    p = np.asarray(pred, dtype=np.float64).reshape(-1)
    y = np.asarray(labels, dtype=np.float64).reshape(-1)
    if p.shape != y.shape:
        raise LengthMismatch(f"{p.shape[0]} predictions vs {y.shape[0]} labels")
    p = np.clip(p, _CLAMP, 1.0 - _CLAMP)
    return float(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)).mean())


class PairSimilarityNet:
    """Five conv blocks + single-neuron FC + sigmoid on 6-channel pair tensors.

    Parameters live in ``params`` (trainable) and ``running`` (batch norm
    statistics); both are plain dicts of numpy arrays keyed by layer name,
    which keeps the optimizer and checkpoint code trivial.
    """

    def __init__(self, config: ModelConfig = ModelConfig(), rng_seed: int = 0):
        self.config = config
        self.dtype = np.dtype(config.dtype)
        self.params: dict[str, np.ndarray] = {}
        self.running: dict[str, np.ndarray] = {}
        self._init_params(rng_seed)

    def _init_params(self, seed: int) -> None:
        cfg = self.config
        rng = np.random.default_rng(seed)
        k = cfg.kernel_size
        c_in = cfg.in_channels
        for i, f in enumerate(cfg.filters, start=1):
            std = np.sqrt(2.0 / (c_in * k * k))
            self.params[f"conv{i}_w"] = rng.normal(0, std, size=(f, c_in, k, k)).astype(self.dtype)
            self.params[f"conv{i}_b"] = np.zeros(f, dtype=self.dtype)
            if cfg.bn_layers[i - 1]:
                self.params[f"bn{i}_gamma"] = np.ones(f, dtype=self.dtype)
                self.params[f"bn{i}_beta"] = np.zeros(f, dtype=self.dtype)
                self.running[f"bn{i}_mean"] = np.zeros(f, dtype=self.dtype)
                self.running[f"bn{i}_var"] = np.ones(f, dtype=self.dtype)
            c_in = f
        n_fc = cfg.fc_inputs
        self.params["fc_w"] = rng.normal(0, 1.0 / np.sqrt(n_fc), size=(1, n_fc)).astype(self.dtype)
        self.params["fc_b"] = np.zeros(1, dtype=self.dtype)

    def _check_input(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=self.dtype)
        cfg = self.config
        if x.ndim == 3:
            x = x[None]
        if (x.ndim != 4 or x.shape[1] != cfg.in_channels
                or x.shape[2] != cfg.input_size or x.shape[3] != cfg.input_size):
            raise ShapeMismatch(
                f"expected (batch, {cfg.in_channels}, {cfg.input_size}, "
                f"{cfg.input_size}), got {x.shape}")
        return x

    def forward(self, x, training: bool = False, cache: dict | None = None) -> np.ndarray:
        """Probabilities in (0, 1), shape (batch, 1).

        ``training`` selects batch statistics (and updates running ones);
        a provided ``cache`` dict is filled with everything backward needs.
        """
        cfg = self.config
        x = self._check_input(x)
        caches = [] if cache is not None else None
        out = x
        for i in range(1, 6):
            out, conv_cache = ops.conv_forward(
                out, self.params[f"conv{i}_w"], self.params[f"conv{i}_b"],
                cfg.strides[i - 1], pad=1)
            bn_cache = act_cache = pool_cache = None
            if cfg.bn_layers[i - 1]:
                out, bn_cache = ops.batchnorm_forward(
                    out, self.params[f"bn{i}_gamma"], self.params[f"bn{i}_beta"],
                    self.running[f"bn{i}_mean"], self.running[f"bn{i}_var"],
                    cfg.batchnorm_eps, cfg.batchnorm_momentum, training)
            if cfg.act_layers[i - 1]:
                out, act_cache = ops.leaky_relu_forward(out, cfg.leaky_slope)
            if cfg.pool_layers[i - 1]:
                out, pool_cache = ops.pool2x2_forward(out, cfg.pool_kind)
            if caches is not None:
                caches.append((conv_cache, bn_cache, act_cache, pool_cache))
        flat = out.reshape(out.shape[0], -1)
        z = flat @ self.params["fc_w"].T + self.params["fc_b"]
        probs = ops.sigmoid(z)
        if cache is not None:
            cache["caches"] = caches
            cache["flat"] = flat
            cache["conv_out_shape"] = out.shape
            cache["probs"] = probs
        return probs

    def loss_and_gradients(self, x, labels):
        """BCE loss plus analytic gradients for every trainable parameter.

        Gradients come back as a dict with the same keys as ``params``.
        Batch norm runs in training mode (gradients flow through the batch
        statistics).
        """
        cfg = self.config
        x = self._check_input(x)
        y = np.asarray(labels, dtype=self.dtype).reshape(-1, 1)
        if y.shape[0] != x.shape[0]:
            raise LengthMismatch(f"{x.shape[0]} inputs vs {y.shape[0]} labels")
        cache: dict = {}
        probs = self.forward(x, training=True, cache=cache)
        loss = bce_loss(probs, y)

        grads: dict[str, np.ndarray] = {}
        batch = x.shape[0]
        dz = (probs - y).astype(self.dtype) / batch  # d(BCE)/d(logit)
        grads["fc_w"] = dz.T @ cache["flat"]
        grads["fc_b"] = dz.sum(axis=0)
        dflat = dz @ self.params["fc_w"]
        dout = dflat.reshape(cache["conv_out_shape"])

        for i in range(5, 0, -1):
            conv_cache, bn_cache, act_cache, pool_cache = cache["caches"][i - 1]
            if pool_cache is not None:
                dout = ops.pool2x2_backward(dout, pool_cache)
            if act_cache is not None:
                dout = ops.leaky_relu_backward(dout, act_cache)
            if bn_cache is not None:
                dout, dgamma, dbeta = ops.batchnorm_backward(dout, bn_cache)
                grads[f"bn{i}_gamma"] = dgamma
                grads[f"bn{i}_beta"] = dbeta
            dout, dw, db = ops.conv_backward(dout, conv_cache)
            grads[f"conv{i}_w"] = dw
            grads[f"conv{i}_b"] = db
        return loss, grads

    def predict_scores(self, x) -> np.ndarray:
        """Inference-mode similarity scores, shape (batch,)."""
        return self.forward(x, training=False).reshape(-1)
