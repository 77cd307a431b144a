"""FAST-9 segment-test corner detection with non-maximum suppression."""

from __future__ import annotations

import numpy as np

from ..errors import ImageTooSmall
from ..imagecore import check_gray
from .keypoints import Keypoint

# Bresenham circle of radius 3, clockwise from 12 o'clock, as (dx, dy).
CIRCLE_OFFSETS = (
    (0, -3), (1, -3), (2, -2), (3, -1), (3, 0), (3, 1), (2, 2), (1, 3),
    (0, 3), (-1, 3), (-2, 2), (-3, 1), (-3, 0), (-3, -1), (-2, -2), (-1, -3),
)
ARC_LENGTH = 9
_QUARTER = (0, 4, 8, 12)

_DX = np.array([o[0] for o in CIRCLE_OFFSETS], dtype=np.intp)
_DY = np.array([o[1] for o in CIRCLE_OFFSETS], dtype=np.intp)


def _candidate_mask(gray: np.ndarray, threshold: float) -> np.ndarray:
    """Exact superset prefilter: every >=9-long arc on the 16-circle covers
    two consecutive quarter points, so only pixels where some adjacent
    quarter-point pair is jointly brighter (or darker) can pass."""
    h, w = gray.shape
    center = gray[3:h - 3, 3:w - 3]
    hi = center + threshold
    lo = center - threshold
    quarters = [gray[3 + _DY[i]:h - 3 + _DY[i], 3 + _DX[i]:w - 3 + _DX[i]]
                for i in _QUARTER]
    cand = np.zeros(center.shape, dtype=bool)
    for bound, op in ((hi, np.greater), (lo, np.less)):
        f = [op(q, bound) for q in quarters]
        cand |= (f[0] & f[1]) | (f[1] & f[2]) | (f[2] & f[3]) | (f[3] & f[0])
    return cand


def fast_score_map(img, threshold: float) -> np.ndarray:
    """Corner score per pixel: sum of |circle - center| where the segment test
    passes, 0 elsewhere. Border of 3 pixels is always 0."""
    gray = check_gray(img)
    h, w = gray.shape
    if h < 7 or w < 7:
        raise ImageTooSmall(f"{w}x{h} below 7x7 minimum for FAST")
    scores = np.zeros((h, w), dtype=np.float64)

    cand = _candidate_mask(gray, threshold)
    ys, xs = np.nonzero(cand)
    if ys.size == 0:
        return scores
    ys = ys + 3
    xs = xs + 3

    vals = gray[ys[None, :] + _DY[:, None], xs[None, :] + _DX[:, None]]  # (16, n)
    center = gray[ys, xs]
    hits = np.zeros(ys.size, dtype=bool)
    for flags in (vals > center + threshold, vals < center - threshold):
        wrapped = np.concatenate([flags, flags[:ARC_LENGTH - 1]], axis=0)
        for start in range(16):
            hits |= wrapped[start:start + ARC_LENGTH].all(axis=0)
    sad = np.abs(vals - center).sum(axis=0)
    scores[ys[hits], xs[hits]] = sad[hits]
    return scores


def detect_fast(img, threshold: float) -> list[Keypoint]:
    """FAST-9 corners after 3x3 non-maximum suppression, in scan order.

    Ties between equal-score neighbours keep the first pixel in raster
    order so results are deterministic.
    """
    scores = fast_score_map(img, threshold)
    h, w = scores.shape
    ys, xs = np.nonzero(scores > 0)
    if ys.size == 0:
        return []
    padded = np.full((h + 2, w + 2), -1.0)
    padded[1:-1, 1:-1] = scores
    own = scores[ys, xs]

    peak = np.ones(ys.size, dtype=bool)
    for dy, dx in ((-1, -1), (-1, 0), (-1, 1), (0, -1)):  # earlier in raster order
        peak &= own > padded[ys + 1 + dy, xs + 1 + dx]
    for dy, dx in ((0, 1), (1, -1), (1, 0), (1, 1)):
        peak &= own >= padded[ys + 1 + dy, xs + 1 + dx]

    return [Keypoint(x=float(x), y=float(y), response=float(s))
            for x, y, s in zip(xs[peak], ys[peak], own[peak])]
