import csv
import json

import pytest

from neardup.cli import main, parse_thresholds
from neardup.imagecore import save_png
from neardup.retrieval import AnnotatedSet, save_annotated_set

from synth import textured_image
from test_retrieval import make_annotated


class TestParseThresholds:
    def test_range_form(self):
        values = parse_thresholds("0.1..0.9:0.1")
        assert len(values) == 9
        assert values[0] == pytest.approx(0.1)
        assert values[-1] == pytest.approx(0.9)

    def test_comma_form(self):
        assert parse_thresholds("0.2,0.4,0.5") == [0.2, 0.4, 0.5]

    def test_bad_step(self):
        with pytest.raises(ValueError):
            parse_thresholds("0.1..0.9:0")


class TestCompare:
    def test_self_pair_exit_zero(self, tmp_path, capsys):
        img = tmp_path / "x.png"
        save_png(textured_image(120, 90, 201), img)
        code = main(["compare", "--method", "improved-orb",
                     "--a", str(img), "--b", str(img)])
        assert code == 0
        out = capsys.readouterr().out
        assert "similar" in out and "elapsed" in out

    def test_different_pair_exit_one(self, tmp_path):
        a = tmp_path / "a.png"
        b = tmp_path / "b.png"
        save_png(textured_image(120, 90, 202), a)
        save_png(textured_image(120, 90, 203), b)
        assert main(["compare", "--method", "histogram",
                     "--a", str(a), "--b", str(b)]) == 1

    def test_error_exit_two(self, tmp_path, capsys):
        missing = tmp_path / "missing.png"
        code = main(["compare", "--method", "histogram",
                     "--a", str(missing), "--b", str(missing)])
        assert code == 2
        assert "error" in capsys.readouterr().err

    def test_json_output(self, tmp_path, capsys):
        img = tmp_path / "x.png"
        save_png(textured_image(80, 60, 204), img)
        code = main(["compare", "--method", "histogram", "--json",
                     "--a", str(img), "--b", str(img)])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["similar"] is True
        assert payload["score"] == pytest.approx(0.0, abs=1e-9)
        assert "elapsed_s" in payload


class TestEvaluateAndSweep:
    def test_evaluate_matches_hand_count(self, tmp_path, capsys):
        annotated = make_annotated(tmp_path, seed=205, n_similar=4, n_dissimilar=6)
        set_path = tmp_path / "set.csv"
        save_annotated_set(annotated, set_path)
        code = main(["evaluate", "--method", "histogram", "--set", str(set_path),
                     "--threshold", "0.4", "--json"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["accuracy"] == 1.0  # mild-noise copies vs distinct textures

    def test_sweep_writes_nine_row_csv(self, tmp_path, capsys):
        annotated = make_annotated(tmp_path, seed=206)
        set_path = tmp_path / "event0.csv"
        save_annotated_set(annotated, set_path)
        out = tmp_path / "curve.csv"
        code = main(["sweep", "--method", "histogram", "--sets", str(set_path),
                     "--thresholds", "0.1..0.9:0.1", "--out", str(out),
                     "--variance-at", "0.2,0.4,0.5", "--json"])
        assert code == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 9
        assert {r["set"] for r in rows} == {"event0"}
        payload = json.loads(capsys.readouterr().out)
        assert "average_variance" in payload


class TestAugmentTrainPipeline:
    def test_augment_then_train_tiny(self, tmp_path, capsys):
        src = tmp_path / "src"
        src.mkdir()
        for i in range(3):
            save_png(textured_image(70, 60, 210 + i), src / f"s{i}.png")
        out = tmp_path / "pairs"
        code = main(["augment", "--in", str(src), "--out", str(out),
                     "--pairs-per-image", "1", "--seed", "5", "--json"])
        assert code == 0
        manifest = out / "manifest.ndjson"
        assert manifest.is_file()

        ckpt = tmp_path / "model.npz"
        code = main(["train", "--manifest", str(manifest), "--epochs", "2",
                     "--batch-size", "2", "--input-size", "64",
                     "--out", str(ckpt), "--json"])
        assert code == 0
        assert ckpt.is_file()
        history = tmp_path / "model.history.csv"
        assert history.is_file()
        with open(history) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2

        # the checkpoint drives the cnn method end to end
        img = tmp_path / "q.png"
        save_png(textured_image(70, 60, 210), img)
        capsys.readouterr()
        code = main(["compare", "--method", "cnn", "--checkpoint", str(ckpt),
                     "--a", str(img), "--b", str(img), "--json"])
        assert code in (0, 1)  # undertrained model may land either side
        payload = json.loads(capsys.readouterr().out)
        assert 0.0 < payload["score"] < 1.0


class TestIngestAndSearch:
    def test_ingest_then_search(self, tmp_path, capsys):
        from neardup.feedfixture import FixtureFeedServer
        from neardup.imagecore import encode_png
        from test_ingest import make_post

        media = {f"img{i}.png": encode_png(textured_image(90, 70, 220 + i))
                 for i in range(5)}
        posts = [make_post(i, "keyword text", [f"img{i}.png"]) for i in range(5)]
        with FixtureFeedServer(posts, media) as server:
            corpus_dir = tmp_path / "corpus"
            code = main(["ingest", "--source", server.feed_url, "--keywords", "keyword",
                         "--out", str(corpus_dir), "--json"])
            assert code == 0
            payload = json.loads(capsys.readouterr().out)
            assert payload["images"] == 5

        query = tmp_path / "query.png"
        save_png(textured_image(90, 70, 220), query)  # equals img0 content
        results_path = tmp_path / "results.json"
        code = main(["search", "--method", "histogram", "--query", str(query),
                     "--corpus", str(corpus_dir), "--out", str(results_path), "--json"])
        assert code == 0
        results = json.loads(results_path.read_text())
        assert results["corpus_size"] == 5
        assert results["retrieved"] >= 1
        assert results["entries"][0]["score"] == pytest.approx(0.0, abs=1e-9)
        assert results["reduction_pct"] == pytest.approx(
            (1 - results["retrieved"] / 5) * 100)
