"""Versioned checkpoint container: config + parameters + running stats + history."""

from __future__ import annotations

import json
from dataclasses import asdict

import numpy as np

from .config import ModelConfig

CHECKPOINT_VERSION = 1


def save_checkpoint(model, path, history=None) -> None:
    arrays = {f"param__{k}": v for k, v in model.params.items()}
    arrays.update({f"running__{k}": v for k, v in model.running.items()})
    meta = {
        "version": CHECKPOINT_VERSION,
        "config": asdict(model.config),
        "history": history or [],
    }
    np.savez_compressed(path, __meta__=json.dumps(meta), **arrays)


def load_checkpoint(path):
    """Returns (model, history); forward passes are bit-identical to the
    state that was saved."""
    from .model import PairSimilarityNet

    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["__meta__"]))
        if meta.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta.get('version')}")
        cfg_dict = meta["config"]
        for key in ("filters", "strides", "pool_layers"):
            cfg_dict[key] = tuple(cfg_dict[key])
        config = ModelConfig(**cfg_dict)
        model = PairSimilarityNet(config)
        for key in data.files:
            if key.startswith("param__"):
                model.params[key[len("param__"):]] = data[key].copy()
            elif key.startswith("running__"):
                model.running[key[len("running__"):]] = data[key].copy()
    return model, meta["history"]
