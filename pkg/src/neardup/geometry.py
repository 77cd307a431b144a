"""Homography estimation with RANSAC and the true-match-ratio classifier.

The DLT solver uses Hartley isotropic normalization and a least-squares SVD
solve; RANSAC scores minimal-sample models by symmetric transfer error
(mean of forward and backward reprojection distances) and refits the best
model on all of its inliers. Sampling is seeded, so results are exactly
reproducible. The true-match ratio, inliers over matches passed in, is the
similarity score of the ORB+RANSAC pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateConfiguration,
    EmptyMask,
    InsufficientMatches,
    InsufficientPoints,
    NoConsensus,
)
from .features import OrbParams, orb_detect_and_describe
from .imagecore import check_rgb, to_gray
from .matching import Match, match_hamming, top_k_matches
from .verdict import HIGHER_IS_SIMILAR, SimilarityVerdict, make_verdict

TOP_MATCHES = 30
_AREA_EPS = 1e-6
_SAMPLE_CHUNK = 256


@dataclass(frozen=True)
class RansacParams:
    max_iterations: int = 2000
    reprojection_threshold: float = 3.0  # pixels
    confidence: float = 0.995
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.reprojection_threshold <= 0:
            raise ValueError("reprojection_threshold must be > 0")


def _as_points(pts) -> np.ndarray:
    arr = np.asarray(pts, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected (n, 2) points, got {arr.shape}")
    return arr


def _any_collinear_triple(pts: np.ndarray) -> bool:
    n = pts.shape[0]
    for i in range(n - 2):
        for j in range(i + 1, n - 1):
            for k in range(j + 1, n):
                u = pts[j] - pts[i]
                v = pts[k] - pts[i]
                if abs(u[0] * v[1] - u[1] * v[0]) < _AREA_EPS:
                    return True
    return False


def _hartley_transform(pts: np.ndarray) -> np.ndarray:
    centroid = pts.mean(axis=0)
    dist = np.linalg.norm(pts - centroid, axis=1).mean()
    if dist < 1e-12:
        raise DegenerateConfiguration("coincident points")
    s = np.sqrt(2.0) / dist
    return np.array([[s, 0.0, -s * centroid[0]],
                     [0.0, s, -s * centroid[1]],
                     [0.0, 0.0, 1.0]])


def dlt_homography(src, dst) -> np.ndarray:
    """Least-squares homography mapping src points onto dst points.

    Requires >= 4 correspondences with no 3 collinear source points; the
    result is scaled so H[2, 2] = 1.
    """
    src = _as_points(src)
    dst = _as_points(dst)
    if src.shape != dst.shape:
        raise ValueError("src and dst must have the same shape")
    n = src.shape[0]
    if n < 4:
        raise InsufficientPoints(f"{n} < 4 correspondences")
    if n == 4 and (_any_collinear_triple(src) or _any_collinear_triple(dst)):
        raise DegenerateConfiguration("3 of the 4 points are collinear")

    Ts = _hartley_transform(src)
    Td = _hartley_transform(dst)
    sn = src @ Ts[:2, :2].T + Ts[:2, 2]
    dn = dst @ Td[:2, :2].T + Td[:2, 2]

    A = np.zeros((2 * n, 9), dtype=np.float64)
    x, y = sn[:, 0], sn[:, 1]
    u, v = dn[:, 0], dn[:, 1]
    A[0::2, 0] = -x
    A[0::2, 1] = -y
    A[0::2, 2] = -1.0
    A[0::2, 6] = u * x
    A[0::2, 7] = u * y
    A[0::2, 8] = u
    A[1::2, 3] = -x
    A[1::2, 4] = -y
    A[1::2, 5] = -1.0
    A[1::2, 6] = v * x
    A[1::2, 7] = v * y
    A[1::2, 8] = v

    _, _, vt = np.linalg.svd(A)
    Hn = vt[-1].reshape(3, 3)
    H = np.linalg.inv(Td) @ Hn @ Ts
    if not np.isfinite(H).all() or abs(H[2, 2]) < 1e-12:
        raise DegenerateConfiguration("solution not normalizable")
    return H / H[2, 2]


def _dlt_batch(src4: np.ndarray, dst4: np.ndarray):
    """Vectorized 4-point DLT for RANSAC minimal samples.

    src4/dst4: (m, 4, 2). Returns (H, valid) with H (m, 3, 3); invalid
    samples (collinear/coincident or unnormalizable) are flagged out.
    """
    m = src4.shape[0]
    valid = np.ones(m, dtype=bool)

    def triples_ok(pts):
        ok = np.ones(m, dtype=bool)
        for i in range(2):
            for j in range(i + 1, 3):
                for k in range(j + 1, 4):
                    u = pts[:, j] - pts[:, i]
                    v = pts[:, k] - pts[:, i]
                    ok &= np.abs(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]) >= _AREA_EPS
        return ok

    valid &= triples_ok(src4) & triples_ok(dst4)

    def normalize(pts):
        c = pts.mean(axis=1, keepdims=True)
        d = np.linalg.norm(pts - c, axis=2).mean(axis=1)
        good = d > 1e-12
        s = np.where(good, np.sqrt(2.0) / np.where(good, d, 1.0), 1.0)
        return (pts - c) * s[:, None, None], c[:, 0, :], s, good

    sn, cs, ss, oks = normalize(src4)
    dn, cd, sd, okd = normalize(dst4)
    valid &= oks & okd

    A = np.zeros((m, 8, 9), dtype=np.float64)
    x, y = sn[:, :, 0], sn[:, :, 1]
    u, v = dn[:, :, 0], dn[:, :, 1]
    A[:, 0::2, 0] = -x
    A[:, 0::2, 1] = -y
    A[:, 0::2, 2] = -1.0
    A[:, 0::2, 6] = u * x
    A[:, 0::2, 7] = u * y
    A[:, 0::2, 8] = u
    A[:, 1::2, 3] = -x
    A[:, 1::2, 4] = -y
    A[:, 1::2, 5] = -1.0
    A[:, 1::2, 6] = v * x
    A[:, 1::2, 7] = v * y
    A[:, 1::2, 8] = v

    _, _, vt = np.linalg.svd(A)
    Hn = vt[:, -1, :].reshape(m, 3, 3)

    # denormalize: H = inv(Td) @ Hn @ Ts
    Ts = np.zeros((m, 3, 3))
    Ts[:, 0, 0] = ss
    Ts[:, 1, 1] = ss
    Ts[:, 0, 2] = -ss * cs[:, 0]
    Ts[:, 1, 2] = -ss * cs[:, 1]
    Ts[:, 2, 2] = 1.0
    Tdinv = np.zeros((m, 3, 3))
    inv_sd = 1.0 / sd
    Tdinv[:, 0, 0] = inv_sd
    Tdinv[:, 1, 1] = inv_sd
    Tdinv[:, 0, 2] = cd[:, 0]
    Tdinv[:, 1, 2] = cd[:, 1]
    Tdinv[:, 2, 2] = 1.0
    H = Tdinv @ Hn @ Ts

    h33 = H[:, 2, 2]
    valid &= np.isfinite(H).all(axis=(1, 2)) & (np.abs(h33) > 1e-12)
    scale = np.where(np.abs(h33) > 1e-12, h33, 1.0)
    return H / scale[:, None, None], valid


def _map_points(H: np.ndarray, pts: np.ndarray):
    """Apply a batch of homographies (m,3,3) to points (n,2) -> (m,n,2)."""
    x, y = pts[:, 0], pts[:, 1]
    denom = H[:, 2, 0, None] * x + H[:, 2, 1, None] * y + H[:, 2, 2, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = (H[:, 0, 0, None] * x + H[:, 0, 1, None] * y + H[:, 0, 2, None]) / denom
        v = (H[:, 1, 0, None] * x + H[:, 1, 1, None] * y + H[:, 1, 2, None]) / denom
    return u, v


def symmetric_transfer_errors(H: np.ndarray, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Per-correspondence symmetric transfer error (pixels) for a batch of H.

    The error is the mean of the forward distance |H src - dst| and the
    backward distance |H^-1 dst - src|; non-finite values map to +inf.
    """
    if H.ndim == 2:
        H = H[None]
    m = H.shape[0]
    dets = np.linalg.det(H)
    invertible = np.isfinite(dets) & (np.abs(dets) > 1e-12)
    Hinv = np.zeros_like(H)
    if invertible.any():
        Hinv[invertible] = np.linalg.inv(H[invertible])

    u, v = _map_points(H, src)
    fwd = np.sqrt((u - dst[:, 0]) ** 2 + (v - dst[:, 1]) ** 2)
    ub, vb = _map_points(Hinv, dst)
    bwd = np.sqrt((ub - src[:, 0]) ** 2 + (vb - src[:, 1]) ** 2)
    err = 0.5 * (fwd + bwd)
    err[~invertible] = np.inf
    err[~np.isfinite(err)] = np.inf
    return err if m > 1 else err


def _needed_iterations(inlier_ratio: float, confidence: float) -> int:
    if inlier_ratio <= 0.0:
        return np.iinfo(np.int64).max
    if inlier_ratio >= 1.0:
        return 1
    denom = np.log1p(-min(inlier_ratio**4, 1.0 - 1e-12))
    return int(np.ceil(np.log(max(1.0 - confidence, 1e-12)) / denom))


def ransac_homography(matches: list[Match], kps_a, kps_b,
                      params: RansacParams = RansacParams()):
    """Robust homography from matched keypoints.

    Returns ``(H, mask)`` where H maps the kps_a frame onto the kps_b frame
    and mask is a 0/1 array, one bit per input match, flagging inliers of
    the final (inlier-refit) model. Deterministic for a given rng_seed.
    """
    n = len(matches)
    if n < 4:
        raise InsufficientMatches(f"{n} < 4 matches")
    src = np.array([[kps_a[m.query_index].x, kps_a[m.query_index].y] for m in matches])
    dst = np.array([[kps_b[m.train_index].x, kps_b[m.train_index].y] for m in matches])

    rng = np.random.default_rng(params.rng_seed)
    best_count = -1
    best_H = None
    done = 0
    while done < params.max_iterations:
        chunk = min(_SAMPLE_CHUNK, params.max_iterations - done)
        # 4 distinct indices per sample
        idx = np.argsort(rng.random((chunk, n)), axis=1)[:, :4]
        H, valid = _dlt_batch(src[idx], dst[idx])
        errs = symmetric_transfer_errors(H, src, dst)
        inl = errs < params.reprojection_threshold
        counts = np.where(valid, inl.sum(axis=1), -1)
        ci = int(np.argmax(counts))  # first max wins: deterministic
        if counts[ci] > best_count:
            best_count = int(counts[ci])
            best_H = H[ci]
        done += chunk
        if best_count >= 4 and done >= _needed_iterations(best_count / n, params.confidence):
            break

    if best_count < 4 or best_H is None:
        raise NoConsensus(f"best consensus {max(best_count, 0)} < 4")

    # refit on all inliers of the best minimal model
    errs = symmetric_transfer_errors(best_H[None], src, dst)[0]
    support = errs < params.reprojection_threshold
    final_H = best_H
    if support.sum() >= 4:
        try:
            final_H = dlt_homography(src[support], dst[support])
        except (DegenerateConfiguration, InsufficientPoints):
            final_H = best_H
    final_errs = symmetric_transfer_errors(final_H[None], src, dst)[0]
    mask = (final_errs < params.reprojection_threshold).astype(np.int64)
    return final_H, mask


def true_match_ratio(mask) -> float:
    """Fraction of inlier bits in a RANSAC mask: sum(mask) / len(mask)."""
    arr = np.asarray(mask)
    if arr.size == 0:
        raise EmptyMask("mask of length zero")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("mask values must be 0 or 1")
    return float(arr.sum() / arr.size)


def improved_orb_similarity(img_a, img_b, threshold: float = 0.35,
                            orb: OrbParams = OrbParams(),
                            ransac: RansacParams = RansacParams()) -> SimilarityVerdict:
    """ORB matching + RANSAC filtering, classified by true-match ratio.

    Cross-checked Hamming matches are cut to the 30 lowest-distance pairs
    and passed to RANSAC; the inlier fraction is the score, and the pair is
    similar when it reaches the threshold. Pairs with fewer than 4 usable
    matches (or no consensus) come back dissimilar with score 0 and the
    degenerate flag set.
    """
    method = "improved-orb"

    def degenerate():
        return make_verdict(0.0, threshold, method, HIGHER_IS_SIMILAR, degenerate=True)

    gray_a = to_gray(check_rgb(img_a))
    gray_b = to_gray(check_rgb(img_b))
    kps_a, desc_a = orb_detect_and_describe(gray_a, orb)
    kps_b, desc_b = orb_detect_and_describe(gray_b, orb)
    if len(kps_a) == 0 or len(kps_b) == 0:
        return degenerate()
    matches = match_hamming(desc_a, desc_b, cross_check=True)
    if len(matches) < 4:
        return degenerate()
    top = top_k_matches(matches, TOP_MATCHES)
    try:
        _, mask = ransac_homography(top, kps_a, kps_b, ransac)
    except NoConsensus:
        return degenerate()
    score = true_match_ratio(mask)
    return make_verdict(score, threshold, method, HIGHER_IS_SIMILAR)
