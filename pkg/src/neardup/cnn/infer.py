"""Thresholded pair classification with a trained network."""

from __future__ import annotations

from ..verdict import HIGHER_IS_SIMILAR, SimilarityVerdict, make_verdict
from .align import align_pair
from .model import PairSimilarityNet


def cnn_similarity(model: PairSimilarityNet, img_a, img_b,
                   threshold: float = 0.5) -> SimilarityVerdict:
    """Similarity score in (0, 1); similar when score >= threshold."""
    tensor = align_pair(img_a, img_b, model.config.input_size)
    score = float(model.predict_scores(tensor[None])[0])
    return make_verdict(score, threshold, "cnn", HIGHER_IS_SIMILAR)
