"""Classification result shared by all similarity methods."""

from __future__ import annotations

from dataclasses import dataclass

LOWER_IS_SIMILAR = "lower"
HIGHER_IS_SIMILAR = "higher"


@dataclass(frozen=True)
class SimilarityVerdict:
    """One method's score for an image pair plus its thresholded verdict.

    ``degenerate`` marks pairs where the method could not produce a usable
    score (for example too few feature matches); they classify dissimilar
    and are flagged for manual review.
    """

    score: float
    threshold: float
    similar: bool
    method: str
    degenerate: bool = False


def make_verdict(score: float, threshold: float, method: str, polarity: str,
                 degenerate: bool = False) -> SimilarityVerdict:
    """Build a verdict whose ``similar`` flag is consistent with the polarity.

    Lower-is-similar methods classify similar on ``score < threshold``;
    higher-is-similar methods on ``score >= threshold``. Degenerate pairs
    are always dissimilar.
    """
    if polarity not in (LOWER_IS_SIMILAR, HIGHER_IS_SIMILAR):
        raise ValueError(f"unknown polarity {polarity!r}")
    if degenerate:
        similar = False
    elif polarity == LOWER_IS_SIMILAR:
        similar = score < threshold
    else:
        similar = score >= threshold
    return SimilarityVerdict(score=float(score), threshold=float(threshold),
                             similar=similar, method=method, degenerate=degenerate)
