"""Pair preprocessing: geometric alignment and the 6-channel tensor.

The second image is warped into the first image's frame with a feature
homography (keypoints + RANSAC) before both are resized to the network
input size and stacked channel-wise, scaled to [0, 1]. When alignment is
impossible (too few matches, no consensus) the second image is used
unwarped; the resize still normalizes global scale changes.
"""

from __future__ import annotations

import numpy as np

from ..errors import NoConsensus
from ..features import OrbParams, orb_detect_and_describe
from ..geometry import RansacParams, ransac_homography
from ..imagecore import check_rgb, resize, to_gray, warp_perspective
from ..matching import Match, match_hamming, top_k_matches

_WORK_MAX_SIDE = 320
_ALIGN_MATCHES = 30


def _working_gray(img: np.ndarray):
    """Luminance capped to a working resolution; returns (gray, sx, sy)."""
    h, w = img.shape[:2]
    side = max(h, w)
    if side <= _WORK_MAX_SIDE:
        return to_gray(img), 1.0, 1.0
    scale = _WORK_MAX_SIDE / side
    ww, wh = max(1, round(w * scale)), max(1, round(h * scale))
    return resize(to_gray(img), ww, wh), ww / w, wh / h


def estimate_alignment(img_a, img_b, orb: OrbParams = OrbParams(),
                       ransac: RansacParams = RansacParams()) -> np.ndarray | None:
    """Full-resolution homography mapping img_b coordinates into img_a's frame,
    or None when no reliable model exists."""
    gray_a, sax, say = _working_gray(img_a)
    gray_b, sbx, sby = _working_gray(img_b)
    try:
        kps_a, desc_a = orb_detect_and_describe(gray_a, orb)
        kps_b, desc_b = orb_detect_and_describe(gray_b, orb)
    except Exception:
        return None
    if len(kps_a) == 0 or len(kps_b) == 0:
        return None
    matches = match_hamming(desc_a, desc_b, cross_check=True)
    if len(matches) < 4:
        return None
    top = top_k_matches(matches, _ALIGN_MATCHES)
    # estimate in the b -> a direction
    flipped = [Match(m.train_index, m.query_index, m.distance) for m in top]
    try:
        H_work, _ = ransac_homography(flipped, kps_b, kps_a, ransac)
    except NoConsensus:
        return None
    # undo the working-resolution scaling: full = S_a^-1 @ H_work @ S_b
    Sb = np.diag([sbx, sby, 1.0])
    Sa_inv = np.diag([1.0 / sax, 1.0 / say, 1.0])
    H_full = Sa_inv @ H_work @ Sb
    return H_full / H_full[2, 2]


def align_pair_ex(img_a, img_b, size: int,
                  orb: OrbParams = OrbParams(),
                  ransac: RansacParams = RansacParams()):
    """(tensor, aligned) where tensor is the (6, size, size) float input and
    aligned reports whether the homography warp was applied."""
    a = check_rgb(img_a)
    b = check_rgb(img_b)
    H = estimate_alignment(a, b, orb, ransac)
    aligned = H is not None
    if aligned:
        try:
            ah, aw = a.shape[:2]
            b_in_a = warp_perspective(b, H, aw, ah)
        except Exception:
            b_in_a = b
            aligned = False
    else:
        b_in_a = b
    a_rs = resize(a, size, size).astype(np.float32) / 255.0
    b_rs = resize(b_in_a, size, size).astype(np.float32) / 255.0
    tensor = np.concatenate([a_rs.transpose(2, 0, 1), b_rs.transpose(2, 0, 1)], axis=0)
    return tensor, aligned


def align_pair(img_a, img_b, size: int,
               orb: OrbParams = OrbParams(),
               ransac: RansacParams = RansacParams()) -> np.ndarray:
    """The (6, size, size) network input for an image pair."""
    tensor, _ = align_pair_ex(img_a, img_b, size, orb, ransac)
    return tensor
