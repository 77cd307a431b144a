"""Oriented binary descriptors over an image pyramid.

Pipeline per level: FAST-9 detection, border filtering, orientation by
intensity centroid, then 256 steered point-pair comparisons on a sigma=2
smoothed copy of the level image. The top ``n_features`` keypoints are
retained across all levels by corner response, and coordinates are mapped
back to the level-0 frame.
"""

from __future__ import annotations

import numpy as np

from ..errors import ImageTooSmall, MissingOrientation, PatchOutOfBounds
from ..imagecore import check_gray, gaussian_blur, resize
from .fast import detect_fast
from .keypoints import Keypoint, OrbParams
from .orientation import orientations_at
from .pattern import load_brief_pattern

DESCRIPTOR_BYTES = 32
_SMOOTH_SIGMA = 2.0
# pattern points live in a radius-13 disc; +1 for rounding, +2 padding
BORDER_MARGIN = 16

_pattern_cache: np.ndarray | None = None


def _pattern() -> np.ndarray:
    global _pattern_cache
    if _pattern_cache is None:
        _pattern_cache = load_brief_pattern()
    return _pattern_cache


def orb_describe(img, kps: list[Keypoint], pattern: np.ndarray | None = None) -> np.ndarray:
    """256-bit descriptors for oriented keypoints, packed to (n, 32) uint8.

    Every keypoint must have an angle assigned; the comparison pattern is
    rotated by it (steered BRIEF). Bit i is 1 when the smoothed intensity at
    the pair's first point is less than at its second.
    """
    gray = check_gray(img)
    if not kps:
        return np.zeros((0, DESCRIPTOR_BYTES), dtype=np.uint8)
    if any(kp.angle is None for kp in kps):
        raise MissingOrientation("keypoint without an assigned angle")
    pat = _pattern() if pattern is None else pattern

    smoothed = gaussian_blur(gray, _SMOOTH_SIGMA)
    h, w = smoothed.shape
    xs = np.array([kp.x for kp in kps], dtype=np.float64)
    ys = np.array([kp.y for kp in kps], dtype=np.float64)
    cos = np.cos([kp.angle for kp in kps])
    sin = np.sin([kp.angle for kp in kps])

    def sample(px, py):
        # rotate pattern offsets by each keypoint angle, then round
        rx = np.rint(xs[:, None] + cos[:, None] * px - sin[:, None] * py).astype(np.intp)
        ry = np.rint(ys[:, None] + sin[:, None] * px + cos[:, None] * py).astype(np.intp)
        if rx.min() < 0 or rx.max() >= w or ry.min() < 0 or ry.max() >= h:
            raise PatchOutOfBounds("descriptor sample outside image")
        return smoothed[ry, rx]

    px1 = pat[:, 0].astype(np.float64)
    py1 = pat[:, 1].astype(np.float64)
    px2 = pat[:, 2].astype(np.float64)
    py2 = pat[:, 3].astype(np.float64)
    bits = sample(px1, py1) < sample(px2, py2)
    return np.packbits(bits, axis=1)


def _level_dims(w: int, h: int, scale: float) -> tuple[int, int]:
    return max(1, int(round(w / scale))), max(1, int(round(h / scale)))


def orb_detect_and_describe(img, params: OrbParams = OrbParams()):
    """Detect and describe keypoints over a scale pyramid.

    Returns ``(keypoints, descriptors)`` where keypoint coordinates are in
    the level-0 frame and descriptors is an (n, 32) uint8 array aligned with
    the keypoint list. Selection keeps the top ``n_features`` by response
    with deterministic (response desc, octave, y, x) ordering.
    """
    gray = check_gray(img)
    h, w = gray.shape
    min_side = 2 * BORDER_MARGIN + 7
    if min(h, w) < min_side:
        raise ImageTooSmall(f"{w}x{h}: smallest usable pyramid level needs {min_side}px")

    radius = params.patch_size // 2
    levels = []  # (level_img, candidates)
    candidates = []  # (response, octave, y_lvl, x_lvl, index-in-level)
    for lvl in range(params.pyramid_levels):
        scale = params.scale_factor**lvl
        lw, lh = _level_dims(w, h, scale)
        if min(lw, lh) < min_side:
            break
        level_img = gray if lvl == 0 else resize(gray, lw, lh)
        kps = detect_fast(level_img, params.fast_threshold)
        kept = [kp for kp in kps
                if BORDER_MARGIN <= kp.x < lw - BORDER_MARGIN
                and BORDER_MARGIN <= kp.y < lh - BORDER_MARGIN]
        levels.append((level_img, kept))

    for lvl, (_, kept) in enumerate(levels):
        for i, kp in enumerate(kept):
            candidates.append((-kp.response, lvl, kp.y, kp.x, i))
    candidates.sort()
    selected = candidates[:params.n_features]

    by_level: dict[int, list[int]] = {}
    for _, lvl, _, _, i in selected:
        by_level.setdefault(lvl, []).append(i)

    # orient + describe per level, then emit in global selection order
    results: dict[tuple[int, int], tuple[Keypoint, np.ndarray]] = {}
    for lvl, idxs in by_level.items():
        level_img, kept = levels[lvl]
        lh, lw = level_img.shape
        sub = [kept[i] for i in idxs]
        xs = [int(round(kp.x)) for kp in sub]
        ys = [int(round(kp.y)) for kp in sub]
        angles = orientations_at(level_img, xs, ys, radius)
        for kp, ang in zip(sub, angles):
            kp.angle = float(ang)
            kp.octave = lvl
        descs = orb_describe(level_img, sub)
        sx = w / lw
        sy = h / lh
        for i, kp, desc in zip(idxs, sub, descs):
            mapped = Keypoint(
                x=(kp.x + 0.5) * sx - 0.5,
                y=(kp.y + 0.5) * sy - 0.5,
                angle=kp.angle,
                response=kp.response,
                octave=lvl,
            )
            results[(lvl, i)] = (mapped, desc)

    out_kps: list[Keypoint] = []
    out_descs = np.zeros((len(selected), DESCRIPTOR_BYTES), dtype=np.uint8)
    for row, (_, lvl, _, _, i) in enumerate(selected):
        kp, desc = results[(lvl, i)]
        out_kps.append(kp)
        out_descs[row] = desc
    return out_kps, out_descs
