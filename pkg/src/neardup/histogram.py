"""Color-based similarity: 3D RGB histograms compared with Bhattacharyya distance.

The descriptor is an 8x8x8 joint RGB histogram (512 bins, R-major then G
then B), L1-normalized by pixel count. Distance is the Hellinger-form
Bhattacharyya distance ``sqrt(1 - sum(sqrt(a*b)))``, which maps identical
histograms to 0 and disjoint-support histograms to 1. Lower distance means
more similar images. Because the descriptor discards all spatial layout, a
pixel-scrambled copy of an image is indistinguishable from the original.
"""

from __future__ import annotations

import numpy as np

from .errors import UnnormalizedHistogram
from .imagecore import check_rgb

BINS_PER_CHANNEL = 8
N_BINS = BINS_PER_CHANNEL**3
_NORM_TOL = 1e-4


def rgb_histogram(img) -> np.ndarray:
    """Normalized 8x8x8 joint RGB histogram, flattened R-major (512 values)."""
    arr = check_rgb(img)
    # 256/8 = 32 levels per bin; index = r*64 + g*8 + b
    bins = (arr >> 5).astype(np.int64)
    flat = bins[:, :, 0] * 64 + bins[:, :, 1] * 8 + bins[:, :, 2]
    counts = np.bincount(flat.ravel(), minlength=N_BINS).astype(np.float64)
    return counts / counts.sum()


def _check_normalized(h, name: str) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (N_BINS,):
        raise ValueError(f"{name}: expected {N_BINS} bins, got shape {h.shape}")
    if np.any(h < 0):
        raise ValueError(f"{name}: negative bin value")
    if abs(h.sum() - 1.0) > _NORM_TOL:
        raise UnnormalizedHistogram(f"{name}: bins sum to {h.sum():.6f}")
    return h


def bhattacharyya_distance(a, b) -> float:
    """Distance in [0, 1] between two normalized histograms.

    0 iff the histograms are bin-wise identical, 1 when their supports are
    disjoint. Symmetric in its arguments.
    """
    a = _check_normalized(a, "a")
    b = _check_normalized(b, "b")
    bc = float(np.sqrt(a * b).sum())
    return float(np.sqrt(max(0.0, 1.0 - bc)))


def histogram_distance(img_a, img_b) -> float:
    """Bhattacharyya distance between the color histograms of two rasters."""
    return bhattacharyya_distance(rgb_histogram(img_a), rgb_histogram(img_b))
