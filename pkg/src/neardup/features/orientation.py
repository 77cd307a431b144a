"""Keypoint orientation by the intensity-centroid method."""

from __future__ import annotations

import numpy as np

from ..errors import PatchOutOfBounds
from ..imagecore import check_gray
from .keypoints import Keypoint

_DEGENERATE_EPS = 1e-12


def _disc_offsets(radius: int):
    span = np.arange(-radius, radius + 1)
    dy, dx = np.meshgrid(span, span, indexing="ij")
    keep = dx * dx + dy * dy <= radius * radius
    return dx[keep].ravel(), dy[keep].ravel()


def orientations_at(img, xs, ys, radius: int) -> np.ndarray:
    """Vectorized intensity-centroid angles for integer keypoint positions.

    angle = atan2(m01, m10) over the circular patch, with m10 = sum(x*I) and
    m01 = sum(y*I) in patch-local coordinates; both moments vanishing gives
    angle 0. Returned angles lie in [0, 2*pi).
    """
    gray = check_gray(img)
    h, w = gray.shape
    xs = np.asarray(xs, dtype=np.intp)
    ys = np.asarray(ys, dtype=np.intp)
    if xs.size == 0:
        return np.zeros(0, dtype=np.float64)
    if (xs.min() < radius or xs.max() >= w - radius
            or ys.min() < radius or ys.max() >= h - radius):
        raise PatchOutOfBounds(f"radius-{radius} patch crosses the image border")
    dx, dy = _disc_offsets(radius)
    patches = gray[ys[:, None] + dy[None, :], xs[:, None] + dx[None, :]]
    m10 = patches @ dx.astype(np.float64)
    m01 = patches @ dy.astype(np.float64)
    angles = np.arctan2(m01, m10)
    angles[(np.abs(m10) < _DEGENERATE_EPS) & (np.abs(m01) < _DEGENERATE_EPS)] = 0.0
    return np.mod(angles, 2.0 * np.pi)


def compute_orientation(img, kp: Keypoint, patch_radius: int) -> float:
    """Orientation of a single keypoint; patch must lie fully inside the image."""
    x = int(round(kp.x))
    y = int(round(kp.y))
    return float(orientations_at(img, [x], [y], patch_radius)[0])
