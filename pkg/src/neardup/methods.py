"""Similarity techniques behind one estimator interface.

Every method is a scikit-learn style estimator: constructor parameters are
stored verbatim (``get_params``/``set_params``/``clone`` work), scoring is
exposed as ``score_pair`` / ``compare`` on a single image pair and
``predict`` over an iterable of pairs. Methods differ in score polarity:
histogram/DAISY/ORB scores are distances (lower = more similar), the
RANSAC true-match ratio and the CNN probability grow with similarity.

Default thresholds follow the reference threshold sweeps: histogram
distance 0.4, DAISY mean distance 0.06, ORB mean Hamming distance 29,
true-match ratio 0.35, CNN probability 0.5. All are constructor
parameters, so sweeps and operators can override them freely.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .errors import NeardupError
from .features import DaisyParams, OrbParams, daisy_describe, orb_detect_and_describe
from .geometry import RansacParams, improved_orb_similarity
from .histogram import histogram_distance
from .imagecore import check_rgb, resize, to_gray
from .matching import match_hamming, mean_match_distance
from .verdict import HIGHER_IS_SIMILAR, LOWER_IS_SIMILAR, SimilarityVerdict, make_verdict


class SimilarityMethod(BaseEstimator):
    """Base estimator: a scored comparison of two RGB rasters."""

    name: str = ""
    polarity: str = LOWER_IS_SIMILAR

    def score_pair(self, img_a, img_b) -> float:
        raise NotImplementedError

    def compare(self, img_a, img_b) -> SimilarityVerdict:
        """Score the pair and classify it against this method's threshold."""
        try:
            score = self.score_pair(img_a, img_b)
        except DegeneratePair:
            return make_verdict(0.0, self.threshold, self.name, self.polarity,
                                degenerate=True)
        return make_verdict(score, self.threshold, self.name, self.polarity)

    def predict(self, pairs) -> np.ndarray:
        """Boolean similar/dissimilar for an iterable of (img_a, img_b) pairs."""
        return np.array([self.compare(a, b).similar for a, b in pairs], dtype=bool)

    def fit(self, X=None, y=None):
        """Hand-crafted methods have no trainable state; returns self."""
        return self


class DegeneratePair(NeardupError):
    """Internal signal: the method cannot score this pair (too little structure)."""


class HistogramMethod(SimilarityMethod):
    """Joint RGB histogram compared by Bhattacharyya distance."""

    name = "histogram"
    polarity = LOWER_IS_SIMILAR

    def __init__(self, threshold: float = 0.4):
        self.threshold = threshold

    def score_pair(self, img_a, img_b) -> float:
        return histogram_distance(img_a, img_b)


class DaisyMethod(SimilarityMethod):
    """Dense descriptors; score is the mean best-match L2 distance.

    Inputs larger than ``max_side`` are downscaled first: dense extraction
    is quadratic in image area and the descriptor distances, not absolute
    resolution, carry the signal.
    """

    name = "daisy"
    polarity = LOWER_IS_SIMILAR

    def __init__(self, threshold: float = 0.06, step: int = 8, max_side: int = 256):
        self.threshold = threshold
        self.step = step
        self.max_side = max_side

    def _descriptors(self, img) -> np.ndarray:
        arr = check_rgb(img)
        h, w = arr.shape[:2]
        side = max(h, w)
        if side > self.max_side:
            s = self.max_side / side
            arr = resize(arr, max(1, round(w * s)), max(1, round(h * s)))
        gray = to_gray(arr)
        params = DaisyParams()
        if min(gray.shape) <= 2 * params.radius:
            raise DegeneratePair("image smaller than descriptor footprint")
        return daisy_describe(gray, step=self.step, params=params)

    def score_pair(self, img_a, img_b) -> float:
        desc_a = self._descriptors(img_a)
        desc_b = self._descriptors(img_b)
        # mean distance of each query descriptor's best match
        from scipy.spatial.distance import cdist
        dist = cdist(desc_a, desc_b, metric="euclidean")
        return float(dist.min(axis=1).mean())


class OrbMethod(SimilarityMethod):
    """Binary keypoint matching; score is the mean cross-checked Hamming distance."""

    name = "orb"
    polarity = LOWER_IS_SIMILAR

    def __init__(self, threshold: float = 29.0, n_features: int = 500,
                 fast_threshold: float = 0.08, pyramid_levels: int = 8,
                 scale_factor: float = 1.2):
        self.threshold = threshold
        self.n_features = n_features
        self.fast_threshold = fast_threshold
        self.pyramid_levels = pyramid_levels
        self.scale_factor = scale_factor

    def _orb_params(self) -> OrbParams:
        return OrbParams(n_features=self.n_features, fast_threshold=self.fast_threshold,
                         pyramid_levels=self.pyramid_levels, scale_factor=self.scale_factor)

    def score_pair(self, img_a, img_b) -> float:
        _, desc_a = orb_detect_and_describe(to_gray(check_rgb(img_a)), self._orb_params())
        _, desc_b = orb_detect_and_describe(to_gray(check_rgb(img_b)), self._orb_params())
        if len(desc_a) == 0 or len(desc_b) == 0:
            raise DegeneratePair("no keypoints")
        matches = match_hamming(desc_a, desc_b, cross_check=True)
        if not matches:
            raise DegeneratePair("no mutual matches")
        return mean_match_distance(matches)


class ImprovedOrbMethod(SimilarityMethod):
    """ORB matches filtered by RANSAC; score is the true-match ratio."""

    name = "improved-orb"
    polarity = HIGHER_IS_SIMILAR

    def __init__(self, threshold: float = 0.35, n_features: int = 500,
                 fast_threshold: float = 0.08, pyramid_levels: int = 8,
                 scale_factor: float = 1.2, ransac_iterations: int = 2000,
                 reprojection_threshold: float = 3.0, rng_seed: int = 0):
        self.threshold = threshold
        self.n_features = n_features
        self.fast_threshold = fast_threshold
        self.pyramid_levels = pyramid_levels
        self.scale_factor = scale_factor
        self.ransac_iterations = ransac_iterations
        self.reprojection_threshold = reprojection_threshold
        self.rng_seed = rng_seed

    def compare(self, img_a, img_b) -> SimilarityVerdict:
        orb = OrbParams(n_features=self.n_features, fast_threshold=self.fast_threshold,
                        pyramid_levels=self.pyramid_levels, scale_factor=self.scale_factor)
        ransac = RansacParams(max_iterations=self.ransac_iterations,
                              reprojection_threshold=self.reprojection_threshold,
                              rng_seed=self.rng_seed)
        return improved_orb_similarity(img_a, img_b, threshold=self.threshold,
                                       orb=orb, ransac=ransac)

    def score_pair(self, img_a, img_b) -> float:
        return self.compare(img_a, img_b).score


class CnnMethod(SimilarityMethod):
    """Trained pair network; score is the sigmoid probability."""

    name = "cnn"
    polarity = HIGHER_IS_SIMILAR

    def __init__(self, threshold: float = 0.5, checkpoint: str | None = None):
        self.threshold = threshold
        self.checkpoint = checkpoint
        self._model = None

    @property
    def model(self):
        if self._model is None:
            if self.checkpoint is None:
                raise NeardupError("CnnMethod needs a checkpoint path or fitted model")
            from .cnn import load_checkpoint
            self._model, _ = load_checkpoint(self.checkpoint)
        return self._model

    def set_model(self, model) -> "CnnMethod":
        self._model = model
        return self

    def fit(self, pairs, y=None, train_config=None):
        """Train the network on a LabeledPair list (see cnn.train)."""
        from .cnn import ModelConfig, PairSimilarityNet, TrainConfig
        from .cnn import train as train_fn
        if self._model is None:
            self._model = PairSimilarityNet(ModelConfig())
        train_fn(self._model, pairs, train_config or TrainConfig())
        return self

    def compare(self, img_a, img_b) -> SimilarityVerdict:
        from .cnn import cnn_similarity
        return cnn_similarity(self.model, img_a, img_b, threshold=self.threshold)

    def score_pair(self, img_a, img_b) -> float:
        return self.compare(img_a, img_b).score


METHOD_NAMES = ("histogram", "daisy", "orb", "improved-orb", "cnn")


def make_method(name: str, threshold: float | None = None, checkpoint: str | None = None,
                rng_seed: int | None = None) -> SimilarityMethod:
    """Build a method by CLI/API name, optionally overriding its threshold."""
    if name == "histogram":
        method = HistogramMethod()
    elif name == "daisy":
        method = DaisyMethod()
    elif name == "orb":
        method = OrbMethod()
    elif name == "improved-orb":
        method = ImprovedOrbMethod()
        if rng_seed is not None:
            method.set_params(rng_seed=rng_seed)
    elif name == "cnn":
        method = CnnMethod(checkpoint=checkpoint)
    else:
        raise ValueError(f"unknown method {name!r}; expected one of {METHOD_NAMES}")
    if threshold is not None:
        method.set_params(threshold=threshold)
    return method
