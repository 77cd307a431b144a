"""Corpus search and the evaluation harness.

``search`` compares a query image against every image in an ingested
corpus and returns the retrieved subset with scores, timings and the
search-space reduction figure. Evaluation runs a method over an annotated
set (query plus labeled corpus paths), yielding accuracy, threshold-sweep
curves and cross-set accuracy variance.

Reference figures reported for the original five-event evaluation are kept
here as informational constants; that corpus is not redistributable, so
they anchor documentation rather than tests.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from sklearn.base import clone

from .errors import (
    EmptySet,
    InvalidCounts,
    MalformedImage,
    MissingPoint,
    UndecodableQuery,
    UnsupportedFormat,
)
from .imagecore import load_image
from .ingest import Corpus
from .methods import SimilarityMethod
from .verdict import HIGHER_IS_SIMILAR, SimilarityVerdict

# Informational constants from the original five-event evaluation (not
# reproducible without that data; never used as test targets).
REFERENCE_ACCURACY_VARIANCES = {
    "histogram": 104.24, "daisy": 196.58, "orb": 17.6,
    "improved-orb": 6.2, "cnn": 0.71,
}
REFERENCE_SEARCH_SPACE_REDUCTION_PCT = {"improved-orb": 65.0, "cnn": 67.0}
REFERENCE_PAIR_SECONDS = {"improved-orb": 0.2, "cnn": 0.55}


@dataclass(frozen=True)
class AnnotatedSet:
    """A labeled evaluation set: one query image, entries marked similar or
    dissimilar to it."""

    query_image: str
    entries: tuple  # of (path, label)

    def __post_init__(self):
        for _, label in self.entries:
            if label not in ("similar", "dissimilar"):
                raise ValueError(f"label must be similar|dissimilar, got {label!r}")


def save_annotated_set(annotated: AnnotatedSet, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["query", annotated.query_image])
        writer.writerow(["path", "label"])
        for entry_path, label in annotated.entries:
            writer.writerow([entry_path, label])


def load_annotated_set(path) -> AnnotatedSet:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows or rows[0][0] != "query":
        raise ValueError(f"{path}: first row must be 'query,<image path>'")
    query = rows[0][1]
    entries = []
    for row in rows[1:]:
        if row[0] == "path":  # header
            continue
        entries.append((row[0], row[1]))
    return AnnotatedSet(query_image=query, entries=tuple(entries))


@dataclass(frozen=True)
class RetrievedEntry:
    sha256: str
    path: str
    score: float
    post_ids: tuple = ()


@dataclass
class ResultSet:
    """Outcome of one corpus search: the retrieved subset plus bookkeeping."""

    query: str
    corpus_id: str
    method: str
    threshold: float
    entries: list  # RetrievedEntry, most similar first
    corpus_size: int
    compared: int
    skipped: int
    reduction_pct: float
    timings: dict = field(default_factory=dict)

    @property
    def retrieved_shas(self) -> set:
        return {e.sha256 for e in self.entries}


def compare(method: SimilarityMethod, img_a, img_b) -> SimilarityVerdict:
    """Score one pair under a method (dispatch is the method object itself)."""
    return method.compare(img_a, img_b)


def search(method: SimilarityMethod, query_path, corpus: Corpus,
           threads: int = 1, progress=None) -> ResultSet:
    """Retrieve the corpus subset similar to the query image.

    Every decodable corpus image is compared; undecodable entries are
    skipped and counted. Entries come back sorted most-similar-first
    (ascending distance or descending score depending on the method's
    polarity), ties broken by sha. ``progress(done, total)`` is invoked
    after each comparison when given.
    """
    try:
        query_img = load_image(query_path)
    except (MalformedImage, UnsupportedFormat, OSError) as exc:
        raise UndecodableQuery(f"{query_path}: {exc}") from exc

    shas = sorted(corpus.images)
    total = len(shas)
    t0 = time.perf_counter()
    done = 0

    def compare_one(sha: str):
        nonlocal done
        try:
            img = load_image(corpus.image_path(sha))
            outcome = sha, method.compare(query_img, img)
        except (MalformedImage, UnsupportedFormat, OSError):
            outcome = sha, None
        done += 1
        if progress is not None:
            progress(done, total)
        return outcome

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(compare_one, shas))
    else:
        outcomes = [compare_one(sha) for sha in shas]
    elapsed = time.perf_counter() - t0

    entries = []
    skipped = 0
    compared = 0
    for sha, verdict in outcomes:
        if verdict is None:
            skipped += 1
            continue
        compared += 1
        if verdict.similar:
            record = corpus.images[sha]
            entries.append(RetrievedEntry(sha256=sha, path=str(corpus.image_path(sha)),
                                          score=verdict.score,
                                          post_ids=tuple(record.post_ids)))
    descending = method.polarity == HIGHER_IS_SIMILAR
    entries.sort(key=lambda e: (-e.score if descending else e.score, e.sha256))

    corpus_size = len(corpus.images)
    reduction = search_space_reduction(corpus_size, len(entries)) if corpus_size else 0.0
    return ResultSet(
        query=str(query_path), corpus_id=corpus.corpus_id, method=method.name,
        threshold=float(method.threshold), entries=entries, corpus_size=corpus_size,
        compared=compared, skipped=skipped, reduction_pct=reduction,
        timings={"compare_s": elapsed,
                 "mean_pair_s": elapsed / compared if compared else 0.0},
    )


def _with_threshold(method: SimilarityMethod, threshold: float | None) -> SimilarityMethod:
    if threshold is None:
        return method
    out = clone(method)
    out.set_params(threshold=threshold)
    if isinstance(method, type(out)) and hasattr(method, "_model"):
        out._model = method._model  # keep a loaded network across clones
    return out


def score_annotated_set(method: SimilarityMethod, annotated: AnnotatedSet):
    """Score every entry once: list of (score, degenerate, truth_label)."""
    if not annotated.entries:
        raise EmptySet("annotated set has no entries")
    query_img = load_image(annotated.query_image)
    scored = []
    for path, label in annotated.entries:
        verdict = method.compare(query_img, load_image(path))
        scored.append((verdict.score, verdict.degenerate, label))
    return scored


def _accuracy_from_scores(scored, polarity: str, threshold: float) -> float:
    correct = 0
    for score, degenerate, label in scored:
        if degenerate:
            similar = False
        elif polarity == HIGHER_IS_SIMILAR:
            similar = score >= threshold
        else:
            similar = score < threshold
        correct += int(similar == (label == "similar"))
    return correct / len(scored)


def evaluate_accuracy(method: SimilarityMethod, annotated: AnnotatedSet,
                      threshold: float | None = None) -> float:
    """(TP + TN) / total against the set's labels."""
    method = _with_threshold(method, threshold)
    scored = score_annotated_set(method, annotated)
    return _accuracy_from_scores(scored, method.polarity, method.threshold)


def threshold_sweep(method: SimilarityMethod, annotated: AnnotatedSet,
                    thresholds) -> list:
    """Accuracy at each threshold; entries are scored once and re-thresholded."""
    scored = score_annotated_set(method, annotated)
    return [(float(t), _accuracy_from_scores(scored, method.polarity, float(t)))
            for t in thresholds]


def write_sweep_csv(curves: dict, path) -> None:
    """curves: set name -> [(threshold, accuracy)]; accuracy stored in [0,1]."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["set", "threshold", "accuracy"])
        for name in sorted(curves):
            for t, acc in curves[name]:
                writer.writerow([name, f"{t:.6g}", f"{acc:.6f}"])


def variance_at(curves: dict, points) -> float:
    """Mean (over points) of the population variance of accuracy across sets.

    Accuracy enters in percent units. Every curve must contain each point
    exactly (curves are built from explicit threshold lists).
    """
    if not curves:
        raise EmptySet("no curves")
    variances = []
    for p in points:
        values = []
        for name, curve in curves.items():
            hits = [acc for t, acc in curve if abs(t - p) < 1e-9]
            if not hits:
                raise MissingPoint(f"curve {name!r} has no threshold {p}")
            values.append(hits[0] * 100.0)
        mean = sum(values) / len(values)
        variances.append(sum((v - mean) ** 2 for v in values) / len(values))
    return sum(variances) / len(variances)


def search_space_reduction(corpus_size: int, retrieved_size: int) -> float:
    """Percent of the corpus an investigator no longer needs to review."""
    if corpus_size < 1 or retrieved_size < 0 or retrieved_size > corpus_size:
        raise InvalidCounts(f"retrieved {retrieved_size} of corpus {corpus_size}")
    return (1.0 - retrieved_size / corpus_size) * 100.0
