import json

import numpy as np
import pytest

from neardup.augment import (
    LabeledPair,
    Modification,
    apply_modification,
    compose,
    draw_text,
    generate_pairs,
    read_manifest,
)
from neardup.errors import EmptySourceDir, InvalidSpec
from neardup.imagecore import load_image, save_png

from synth import textured_image


class TestApplyModification:
    def test_scale_dims_match_factor_product(self):
        img = textured_image(100, 100, 1)
        out = apply_modification(img, Modification("scale", {"fx": 7.42, "fy": 5.23}))
        assert out.shape[:2] == (523, 742)

    def test_full_frame_crop_identity(self):
        img = textured_image(30, 20, 2)
        out = apply_modification(img, Modification("crop", {"left": 0, "top": 0,
                                                            "width": 30, "height": 20}))
        assert np.array_equal(out, img)

    def test_crop_outside_rejected(self):
        img = textured_image(30, 20, 2)
        with pytest.raises(InvalidSpec):
            apply_modification(img, Modification("crop", {"left": 5, "top": 0,
                                                          "width": 30, "height": 10}))

    def test_noise_deterministic_per_seed(self):
        img = textured_image(24, 24, 3)
        spec = Modification("noise", {"stddev": 0.1})
        a = apply_modification(img, spec, rng_seed=9)
        b = apply_modification(img, spec, rng_seed=9)
        c = apply_modification(img, spec, rng_seed=10)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_stitch_right_dims(self):
        base = textured_image(40, 30, 4)
        other = textured_image(20, 60, 5)
        out = apply_modification(base, Modification("stitch", {"side": "right",
                                                               "other_image": other}))
        assert out.shape[0] == 30
        assert out.shape[1] == 40 + round(20 * 30 / 60)
        assert np.array_equal(out[:, :40], base)

    def test_brightness_contrast_colorshift(self):
        img = np.full((4, 4, 3), 100, dtype=np.uint8)
        brighter = apply_modification(img, Modification("brightness", {"delta": 50}))
        assert np.all(brighter == 150)
        contrasted = apply_modification(img, Modification("contrast", {"factor": 2.0}))
        assert np.all(contrasted == 72)  # (100-128)*2+128
        shifted = apply_modification(img, Modification("color_shift", {"dr": 10, "db": -10}))
        assert np.all(shifted[:, :, 0] == 110)
        assert np.all(shifted[:, :, 1] == 100)
        assert np.all(shifted[:, :, 2] == 90)

    def test_unknown_kind_rejected(self):
        with pytest.raises(InvalidSpec):
            apply_modification(textured_image(8, 8, 1), Modification("swирl", {}))

    def test_distort_keeps_dims(self):
        img = textured_image(50, 40, 6)
        out = apply_modification(img, Modification("distort", {"strength": 0.04}), rng_seed=3)
        assert out.shape == img.shape


class TestDrawText:
    def test_changes_pixels_with_color(self):
        img = np.zeros((20, 80, 3), dtype=np.uint8)
        out = draw_text(img, "NEWS", 2, 2, scale=2, color=(255, 0, 0))
        assert np.any(out[:, :, 0] == 255)
        assert np.all(out[:, :, 1] == 0)

    def test_clipped_at_border(self):
        img = np.zeros((10, 10, 3), dtype=np.uint8)
        out = draw_text(img, "WWWW", 5, 5, scale=2)
        assert out.shape == img.shape  # no crash, silent clipping


class TestCompose:
    def test_empty_chain_identity(self):
        img = textured_image(16, 16, 7)
        assert np.array_equal(compose(img, []), img)

    def test_scale_down_up_restores_dims(self):
        img = textured_image(32, 24, 8)
        out = compose(img, [Modification("scale", {"fx": 2, "fy": 2}),
                            Modification("scale", {"fx": 0.5, "fy": 0.5})])
        assert out.shape == img.shape

    def test_failure_names_stage(self):
        img = textured_image(32, 24, 8)
        chain = [Modification("scale", {"fx": 0.5, "fy": 0.5}),
                 Modification("crop", {"left": 0, "top": 0, "width": 30, "height": 10})]
        with pytest.raises(InvalidSpec, match="stage 1"):
            compose(img, chain)

    def test_table_style_combined_chain(self):
        img = textured_image(60, 60, 9)
        other = textured_image(30, 30, 10)
        chain = [
            Modification("crop", {"left": 5, "top": 5, "width": 50, "height": 50}),
            Modification("scale", {"fx": 1.5, "fy": 1.5}),
            Modification("add_text", {"text": "VIRAL", "x": 3, "y": 3, "scale": 1}),
            Modification("stitch", {"side": "bottom", "other_image": other}),
        ]
        out = compose(img, chain, seed=5)
        assert out.shape[1] == 75  # 50 * 1.5
        assert out.shape[0] == 75 + 75  # stitched partner resized to width


class TestGeneratePairs:
    @pytest.fixture()
    def source_dir(self, tmp_path):
        src = tmp_path / "src"
        src.mkdir()
        for i in range(5):
            save_png(textured_image(48, 40, 100 + i), src / f"img{i}.png")
        (src / "junk.png").write_bytes(b"\x89PNG\r\n\x1a\nnot really")
        return src

    def test_cardinality_and_balance(self, source_dir, tmp_path):
        out = tmp_path / "out"
        pairs = generate_pairs(source_dir, out, pairs_per_image=1, seed=11)
        sims = [p for p in pairs if p.label == "similar"]
        dis = [p for p in pairs if p.label == "dissimilar"]
        assert len(sims) == 5
        assert len(dis) == 5

    def test_deterministic_manifest(self, source_dir, tmp_path):
        a = generate_pairs(source_dir, tmp_path / "a", pairs_per_image=2, seed=13)
        b = generate_pairs(source_dir, tmp_path / "b", pairs_per_image=2, seed=13)
        strip = lambda p, root: (p.image_a.replace(str(root), ""),
                                 p.image_b.replace(str(root), ""), p.label,
                                 p.chain and [m.to_json() for m in p.chain], p.seed)
        assert [strip(p, tmp_path / "a") for p in a] == [strip(p, tmp_path / "b") for p in b]

    def test_provenance_replays_bit_exactly(self, source_dir, tmp_path):
        out = tmp_path / "out"
        pairs = generate_pairs(source_dir, out, pairs_per_image=1, seed=17)
        for p in pairs:
            if p.label != "similar":
                continue
            a = load_image(p.image_a)
            replayed = compose(a, p.chain, seed=p.seed)
            assert np.array_equal(replayed, load_image(p.image_b))

    def test_dissimilar_pairs_distinct_sources(self, source_dir, tmp_path):
        pairs = generate_pairs(source_dir, tmp_path / "out", pairs_per_image=2, seed=19)
        for p in pairs:
            if p.label == "dissimilar":
                assert p.image_a != p.image_b
                assert p.chain is None

    def test_skipped_sources_listed(self, source_dir, tmp_path):
        out = tmp_path / "out"
        generate_pairs(source_dir, out, pairs_per_image=1, seed=21)
        rows = [json.loads(l) for l in (out / "manifest.ndjson").read_text().splitlines()]
        skipped = [r for r in rows if "skipped" in r]
        assert len(skipped) == 1
        assert "junk.png" in skipped[0]["skipped"]

    def test_manifest_round_trip(self, source_dir, tmp_path):
        out = tmp_path / "out"
        pairs = generate_pairs(source_dir, out, pairs_per_image=1, seed=23)
        loaded = read_manifest(out / "manifest.ndjson")
        assert len(loaded) == len(pairs)
        assert all(isinstance(p, LabeledPair) for p in loaded)
        assert [p.label for p in loaded] == [p.label for p in pairs]

    def test_empty_source_dir(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        with pytest.raises(EmptySourceDir):
            generate_pairs(empty, tmp_path / "out", 1, 1)
