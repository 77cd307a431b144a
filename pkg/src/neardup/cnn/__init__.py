"""Trained pair-similarity network: alignment, forward/backward, training."""

from .config import ModelConfig, TrainConfig
from .model import PairSimilarityNet, bce_loss
from .align import align_pair, align_pair_ex
from .train import train
from .checkpoint import load_checkpoint, save_checkpoint
from .infer import cnn_similarity

__all__ = [
    "ModelConfig",
    "TrainConfig",
    "PairSimilarityNet",
    "bce_loss",
    "align_pair",
    "align_pair_ex",
    "train",
    "save_checkpoint",
    "load_checkpoint",
    "cnn_similarity",
]
