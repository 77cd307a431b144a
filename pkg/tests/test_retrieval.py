import hashlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neardup.errors import (
    EmptySet,
    InvalidCounts,
    MissingPoint,
    UndecodableQuery,
)
from neardup.imagecore import encode_png, save_png
from neardup.ingest import Corpus, ImageRecord, save_corpus
from neardup.methods import HistogramMethod, ImprovedOrbMethod
from neardup.retrieval import (
    AnnotatedSet,
    evaluate_accuracy,
    load_annotated_set,
    save_annotated_set,
    search,
    search_space_reduction,
    threshold_sweep,
    variance_at,
    write_sweep_csv,
)

from synth import make_event, textured_image


def write_corpus(tmp_path, arrays, posts=None, corpus_id="test-corpus"):
    """arrays: name -> (image, post_ids)."""
    corpus_dir = tmp_path / "corpus"
    (corpus_dir / "images").mkdir(parents=True, exist_ok=True)
    images = {}
    for name, (arr, post_ids) in arrays.items():
        data = encode_png(arr)
        sha = hashlib.sha256(data).hexdigest()
        rel = f"images/{sha}.png"
        (corpus_dir / rel).write_bytes(data)
        images[sha] = ImageRecord(sha256=sha, file=rel, post_ids=list(post_ids),
                                  source_urls=[name])
    corpus = Corpus(corpus_id=corpus_id, keywords=["k"], source="fixture",
                    created_at="2026-01-01T00:00:00Z", posts=posts or [],
                    images=images, failures=[])
    return save_corpus(corpus, corpus_dir)


class TestSearch:
    def test_corpus_of_query_itself(self, tmp_path):
        img = textured_image(100, 80, 70)
        corpus = write_corpus(tmp_path, {"q": (img, ["p1"])})
        qp = tmp_path / "query.png"
        save_png(img, qp)
        result = search(HistogramMethod(), qp, corpus)
        assert len(result.entries) == 1
        assert result.reduction_pct == 0.0

    def test_empty_corpus(self, tmp_path):
        corpus = write_corpus(tmp_path, {})
        qp = tmp_path / "query.png"
        save_png(textured_image(40, 40, 71), qp)
        result = search(HistogramMethod(), qp, corpus)
        assert result.entries == []
        assert result.corpus_size == 0

    def test_subset_contract_and_sorting(self, tmp_path):
        query = textured_image(120, 90, 72)
        arrays = {"q": (query, ["p0"])}
        for i in range(4):
            arrays[f"d{i}"] = (textured_image(120, 90, 80 + i), [f"p{i+1}"])
        corpus = write_corpus(tmp_path, arrays)
        qp = tmp_path / "query.png"
        save_png(query, qp)
        result = search(HistogramMethod(), qp, corpus, threads=2)
        assert result.retrieved_shas <= set(corpus.images)
        assert len(result.entries) <= result.corpus_size
        scores = [e.score for e in result.entries]
        assert scores == sorted(scores)  # lower-is-similar: ascending
        assert result.reduction_pct == search_space_reduction(
            result.corpus_size, len(result.entries))
        assert result.timings["mean_pair_s"] > 0

    def test_synthetic_event_precision_recall(self, tmp_path):
        from neardup.imagecore import load_image
        query_path, entries = make_event(tmp_path / "event", seed=141)
        arrays = {p: (load_image(p), [f"p{i}"]) for i, (p, _) in enumerate(entries)}
        corpus = write_corpus(tmp_path, arrays)
        sha_by_label = {}
        for path, label in entries:
            data = encode_png(arrays[path][0])
            sha_by_label[hashlib.sha256(data).hexdigest()] = label
        result = search(ImprovedOrbMethod(rng_seed=5), query_path, corpus)
        retrieved = result.retrieved_shas
        relevant = {sha for sha, label in sha_by_label.items() if label == "similar"}
        tp = len(retrieved & relevant)
        precision = tp / len(retrieved) if retrieved else 0.0
        recall = tp / len(relevant)
        assert precision >= 0.9
        assert recall >= 0.75

    def test_undecodable_query(self, tmp_path):
        corpus = write_corpus(tmp_path, {})
        bad = tmp_path / "bad.png"
        bad.write_bytes(b"\x89PNG\r\n\x1a\nnope")
        with pytest.raises(UndecodableQuery):
            search(HistogramMethod(), bad, corpus)

    def test_undecodable_corpus_entry_skipped(self, tmp_path):
        img = textured_image(60, 60, 73)
        corpus = write_corpus(tmp_path, {"q": (img, [])})
        sha = next(iter(corpus.images))
        corpus.image_path(sha).write_bytes(b"\x89PNG\r\n\x1a\ntruncated")
        qp = tmp_path / "query.png"
        save_png(img, qp)
        result = search(HistogramMethod(), qp, corpus)
        assert result.skipped == 1
        assert result.entries == []


def make_annotated(tmp_path, seed=90, n_similar=3, n_dissimilar=3):
    from neardup.augment import Modification, compose
    query = textured_image(80, 60, seed)
    qp = tmp_path / "query.png"
    save_png(query, qp)
    entries = []
    for i in range(n_similar):
        img = compose(query, [Modification("noise", {"stddev": 0.01})], seed=seed + i)
        p = tmp_path / f"sim{i}.png"
        save_png(img, p)
        entries.append((str(p), "similar"))
    for i in range(n_dissimilar):
        p = tmp_path / f"dis{i}.png"
        save_png(textured_image(80, 60, seed + 50 + i), p)
        entries.append((str(p), "dissimilar"))
    return AnnotatedSet(query_image=str(qp), entries=tuple(entries))


class TestEvaluate:
    def test_perfect_classifier_accuracy_one(self, tmp_path):
        annotated = make_annotated(tmp_path)
        acc = evaluate_accuracy(HistogramMethod(threshold=0.4), annotated)
        assert acc == 1.0

    def test_inverted_labels_accuracy_zero(self, tmp_path):
        annotated = make_annotated(tmp_path)
        flipped = AnnotatedSet(
            query_image=annotated.query_image,
            entries=tuple((p, "dissimilar" if l == "similar" else "similar")
                          for p, l in annotated.entries))
        assert evaluate_accuracy(HistogramMethod(threshold=0.4), flipped) == 0.0

    def test_matches_hand_confusion_matrix(self, tmp_path):
        annotated = make_annotated(tmp_path, n_similar=4, n_dissimilar=6)
        method = HistogramMethod(threshold=0.4)
        from neardup.imagecore import load_image
        query = load_image(annotated.query_image)
        tp = tn = 0
        for path, label in annotated.entries:
            similar = method.compare(query, load_image(path)).similar
            if similar and label == "similar":
                tp += 1
            if not similar and label == "dissimilar":
                tn += 1
        expected = (tp + tn) / len(annotated.entries)
        assert evaluate_accuracy(method, annotated) == expected

    def test_empty_set_rejected(self, tmp_path):
        annotated = AnnotatedSet(query_image="x.png", entries=())
        with pytest.raises(EmptySet):
            evaluate_accuracy(HistogramMethod(), annotated)

    def test_csv_round_trip(self, tmp_path):
        annotated = make_annotated(tmp_path)
        path = tmp_path / "set.csv"
        save_annotated_set(annotated, path)
        loaded = load_annotated_set(path)
        assert loaded == annotated


class TestSweep:
    def test_single_threshold_equals_evaluate(self, tmp_path):
        annotated = make_annotated(tmp_path)
        method = HistogramMethod()
        curve = threshold_sweep(method, annotated, [0.4])
        assert len(curve) == 1
        assert curve[0][1] == evaluate_accuracy(method, annotated, threshold=0.4)

    def test_nine_point_sweep(self, tmp_path):
        annotated = make_annotated(tmp_path)
        thresholds = [round(0.1 * k, 1) for k in range(1, 10)]
        curve = threshold_sweep(HistogramMethod(), annotated, thresholds)
        assert len(curve) == 9
        assert [t for t, _ in curve] == thresholds

    def test_retrieval_count_monotone_for_higher_polarity(self, tmp_path):
        query_path, entries = make_event(tmp_path / "event", seed=143)
        annotated = AnnotatedSet(query_image=query_path, entries=tuple(entries))
        method = ImprovedOrbMethod(rng_seed=2)
        from neardup.retrieval import score_annotated_set
        scored = score_annotated_set(method, annotated)
        thresholds = [0.1, 0.3, 0.5, 0.7, 0.9]
        counts = []
        for t in thresholds:
            counts.append(sum(1 for s, d, _ in scored if not d and s >= t))
        assert counts == sorted(counts, reverse=True)

    def test_sweep_csv(self, tmp_path):
        annotated = make_annotated(tmp_path)
        curve = threshold_sweep(HistogramMethod(), annotated, [0.2, 0.4])
        out = tmp_path / "curve.csv"
        write_sweep_csv({"event0": curve}, out)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "set,threshold,accuracy"
        assert len(lines) == 3


class TestVarianceAt:
    def test_identical_curves_zero(self):
        curve = [(0.2, 0.9), (0.4, 0.8)]
        assert variance_at({"a": curve, "b": list(curve)}, [0.2, 0.4]) == 0.0

    def test_hand_arithmetic(self):
        curves = {"a": [(0.4, 0.9)], "b": [(0.4, 0.7)]}
        # percents 90 and 70: mean 80, population variance 100
        assert variance_at(curves, [0.4]) == pytest.approx(100.0)

    def test_missing_point(self):
        curves = {"a": [(0.4, 0.9)], "b": [(0.5, 0.7)]}
        with pytest.raises(MissingPoint):
            variance_at(curves, [0.4])


class TestSearchSpaceReduction:
    def test_examples(self):
        assert search_space_reduction(100, 33) == 67.0
        assert search_space_reduction(10, 10) == 0.0
        assert search_space_reduction(10, 0) == 100.0

    def test_invalid_counts(self):
        with pytest.raises(InvalidCounts):
            search_space_reduction(0, 0)
        with pytest.raises(InvalidCounts):
            search_space_reduction(5, 6)

    @given(st.integers(1, 10_000), st.data())
    @settings(max_examples=100, deadline=None)
    def test_formula_exact(self, corpus_size, data):
        retrieved = data.draw(st.integers(0, corpus_size))
        assert search_space_reduction(corpus_size, retrieved) == (
            (1 - retrieved / corpus_size) * 100.0)
