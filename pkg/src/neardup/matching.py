"""Brute-force descriptor matching and the scalar match-distance scores.

Binary descriptors are compared by Hamming distance (popcount of XOR),
real-valued descriptors by Euclidean distance. All matchers are exhaustive;
ties are broken by the lowest train index so results are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import EmptyDescriptorSet, NoMatches

@dataclass(frozen=True)
class Match:
    query_index: int
    train_index: int
    distance: float


def hamming_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(n, m) Hamming distances between packed (n, 32) uint8 descriptor sets."""
    xor = a[:, None, :] ^ b[None, :, :]
    return np.bitwise_count(xor).sum(axis=2, dtype=np.int64)


def match_hamming(a, b, cross_check: bool = False) -> list[Match]:
    """Nearest-neighbor matches from a to b by Hamming distance.

    With ``cross_check`` only mutual nearest pairs are kept. Ties go to the
    lowest train index.
    """
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    if a.size == 0 or b.size == 0:
        raise EmptyDescriptorSet("both descriptor sets must be non-empty")
    dist = hamming_matrix(a, b)
    nn = dist.argmin(axis=1)  # argmin keeps the first (lowest) index on ties
    matches = []
    if cross_check:
        rev = dist.argmin(axis=0)
        for qi, ti in enumerate(nn):
            if rev[ti] == qi:
                matches.append(Match(qi, int(ti), float(dist[qi, ti])))
    else:
        for qi, ti in enumerate(nn):
            matches.append(Match(qi, int(ti), float(dist[qi, ti])))
    return matches


def mean_match_distance(matches: list[Match], k: int | None = None) -> float:
    """Mean of the k smallest match distances (all matches when k is None)."""
    if not matches:
        raise NoMatches("empty match list")
    if k is not None and k < 1:
        raise ValueError("k must be >= 1")
    distances = sorted(m.distance for m in matches)
    if k is not None:
        distances = distances[:k]
    return float(np.mean(distances))


def knn_match_euclidean(a, b, k: int) -> list[Match]:
    """k nearest neighbors in b for every query descriptor in a, by L2.

    Returns the flattened match list ordered by (query, rank).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise EmptyDescriptorSet("both descriptor sets must be non-empty")
    # exact per-pair form (no expanded-dot cancellation: identical rows give 0)
    dist = cdist(a, b, metric="euclidean")
    k_eff = min(k, b.shape[0])
    order = np.argsort(dist, axis=1, kind="stable")[:, :k_eff]
    matches = []
    for qi in range(a.shape[0]):
        for ti in order[qi]:
            matches.append(Match(qi, int(ti), float(dist[qi, ti])))
    return matches


def top_k_matches(matches: list[Match], k: int) -> list[Match]:
    """The k lowest-distance matches; ties ordered by (query, train) index."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = sorted(matches, key=lambda m: (m.distance, m.query_index, m.train_index))
    return ranked[:k]
