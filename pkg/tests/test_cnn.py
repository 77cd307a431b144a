import numpy as np
import pytest

from neardup.cnn import (
    ModelConfig,
    PairSimilarityNet,
    TrainConfig,
    align_pair,
    align_pair_ex,
    bce_loss,
    load_checkpoint,
    save_checkpoint,
    train,
)
from neardup.cnn.train import evaluate_pairs
from neardup.errors import LengthMismatch, ShapeMismatch
from neardup.imagecore import warp_perspective

from synth import random_homography, textured_image

TINY = ModelConfig(input_size=16, filters=(2, 2, 2, 2, 1), strides=(4, 1, 1, 1, 1),
                   pool_layers=(True, False, False, False, False), dtype="float64")


def scalar_forward(model, x):
    """Independent loop-based forward pass (training-mode batch norm)."""
    cfg = model.config
    p = model.params

    def conv(inp, w, b, stride):
        B, C, H, W = inp.shape
        F, _, k, _ = w.shape
        out_h = (H + 2 - k) // stride + 1
        out_w = (W + 2 - k) // stride + 1
        padded = np.zeros((B, C, H + 2, W + 2))
        padded[:, :, 1:H + 1, 1:W + 1] = inp
        out = np.zeros((B, F, out_h, out_w))
        for bb in range(B):
            for f in range(F):
                for oy in range(out_h):
                    for ox in range(out_w):
                        acc = 0.0
                        for c in range(C):
                            for ky in range(k):
                                for kx in range(k):
                                    acc += (w[f, c, ky, kx]
                                            * padded[bb, c, oy * stride + ky, ox * stride + kx])
                        out[bb, f, oy, ox] = acc + b[f]
        return out

    out = x.astype(np.float64)
    for i in range(1, 6):
        out = conv(out, p[f"conv{i}_w"], p[f"conv{i}_b"], cfg.strides[i - 1])
        if cfg.bn_layers[i - 1]:
            mu = out.mean(axis=(0, 2, 3))
            var = out.var(axis=(0, 2, 3))
            xhat = (out - mu[None, :, None, None]) / np.sqrt(var[None, :, None, None]
                                                             + cfg.batchnorm_eps)
            out = (p[f"bn{i}_gamma"][None, :, None, None] * xhat
                   + p[f"bn{i}_beta"][None, :, None, None])
        if cfg.act_layers[i - 1]:
            out = np.where(out > 0, out, cfg.leaky_slope * out)
        if cfg.pool_layers[i - 1]:
            B, C, H, W = out.shape
            pooled = np.zeros((B, C, H // 2, W // 2))
            for yy in range(H // 2):
                for xx in range(W // 2):
                    pooled[:, :, yy, xx] = out[:, :, 2 * yy:2 * yy + 2,
                                               2 * xx:2 * xx + 2].max(axis=(2, 3))
            out = pooled
    flat = out.reshape(out.shape[0], -1)
    z = flat @ p["fc_w"].T + p["fc_b"]
    return 1.0 / (1.0 + np.exp(-z))


class TestForward:
    def test_output_in_open_unit_interval(self):
        model = PairSimilarityNet(TINY, rng_seed=1)
        x = np.random.default_rng(2).normal(0, 1, size=(3, 6, 16, 16))
        out = model.forward(x)
        assert out.shape == (3, 1)
        assert np.all(out > 0) and np.all(out < 1)

    def test_zero_fc_gives_exactly_half(self):
        model = PairSimilarityNet(TINY, rng_seed=1)
        model.params["fc_w"][:] = 0.0
        model.params["fc_b"][:] = 0.0
        x = np.random.default_rng(3).normal(0, 1, size=(2, 6, 16, 16))
        assert np.all(model.forward(x) == 0.5)

    def test_matches_scalar_reference(self):
        model = PairSimilarityNet(TINY, rng_seed=4)
        x = np.random.default_rng(5).normal(0, 1, size=(2, 6, 16, 16))
        fast = model.forward(x, training=True)
        slow = scalar_forward(model, x)
        assert np.allclose(fast, slow, rtol=1e-9, atol=1e-12)

    def test_shape_mismatch_rejected(self):
        model = PairSimilarityNet(TINY)
        with pytest.raises(ShapeMismatch):
            model.forward(np.zeros((1, 6, 8, 8)))

    def test_default_architecture_shapes(self):
        cfg = ModelConfig()
        assert cfg.filters == (64, 32, 16, 6, 1)
        assert cfg.feature_sizes() == [16, 8, 4, 2, 2]
        assert cfg.fc_inputs == 4


class TestBceLoss:
    def test_half_prediction(self):
        assert bce_loss([0.5], [1.0]) == pytest.approx(np.log(2), abs=1e-9)

    def test_confident_correct_near_zero(self):
        assert bce_loss([1.0 - 1e-9], [1.0]) < 1e-6

    def test_hand_evaluated_batch(self):
        expected = -(np.log(0.9) + np.log(0.8)) / 2
        assert bce_loss([0.9, 0.2], [1.0, 0.0]) == pytest.approx(expected, abs=1e-9)
        assert bce_loss([0.9, 0.2], [1.0, 0.0]) == pytest.approx(0.1643, abs=1e-4)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            bce_loss([0.5, 0.5], [1.0])


def finite_difference_check(model, x, y, h=1e-3):
    """Max relative error between analytic and central-difference gradients."""
    _, grads = model.loss_and_gradients(x, y)
    worst = 0.0
    for key, param in model.params.items():
        flat = param.reshape(-1)
        gflat = grads[key].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            lp, _ = model.loss_and_gradients(x, y)
            flat[i] = orig - h
            lm, _ = model.loss_and_gradients(x, y)
            flat[i] = orig
            fd = (lp - lm) / (2 * h)
            rel = abs(gflat[i] - fd) / max(abs(gflat[i]), abs(fd), 1e-4)
            worst = max(worst, rel)
    return worst


class TestGradients:
    def test_analytic_matches_finite_differences(self):
        model = PairSimilarityNet(TINY, rng_seed=7)
        rng = np.random.default_rng(8)
        x = rng.normal(0, 1, size=(4, 6, 16, 16))
        y = np.array([1.0, 0.0, 1.0, 0.0])
        assert finite_difference_check(model, x, y) < 1e-3

    def test_duplicated_batch_same_gradients(self):
        model = PairSimilarityNet(TINY, rng_seed=9)
        rng = np.random.default_rng(10)
        x = rng.normal(0, 1, size=(2, 6, 16, 16))
        y = np.array([1.0, 0.0])
        _, g1 = model.loss_and_gradients(x, y)
        _, g2 = model.loss_and_gradients(np.concatenate([x, x]), np.concatenate([y, y]))
        for key in g1:
            assert np.allclose(g1[key], g2[key], rtol=1e-8, atol=1e-12)

    def test_zero_input_symmetric_fc_gradient(self):
        model = PairSimilarityNet(TINY, rng_seed=11)
        x = np.zeros((2, 6, 16, 16))
        y = np.array([1.0, 0.0])
        _, grads = model.loss_and_gradients(x, y)
        # conv biases are zero, so pooled features are constant in space and
        # identical across the two items; labels 1 and 0 cancel in fc_w
        assert np.allclose(grads["fc_w"], 0.0, atol=1e-12)


class TestBatchnormBehavior:
    def test_training_mode_normalizes_activations(self):
        model = PairSimilarityNet(TINY, rng_seed=12)
        x = np.random.default_rng(13).normal(0, 2, size=(8, 6, 16, 16))
        cache = {}
        model.forward(x, training=True, cache=cache)
        checked = 0
        for i in range(5):
            bn_cache = cache["caches"][i][1]
            if bn_cache is None:
                continue
            xhat = bn_cache[0]
            mu = xhat.mean(axis=(0, 2, 3))
            var = xhat.var(axis=(0, 2, 3))
            assert np.abs(mu).max() < 1e-4
            assert np.abs(var - 1.0).max() < 1e-3
            checked += 1
        assert checked == 3  # layers 2-4


class TestCheckpoint:
    def test_round_trip_bit_identical(self, tmp_path):
        model = PairSimilarityNet(TINY, rng_seed=14)
        rng = np.random.default_rng(15)
        X = rng.normal(0, 1, size=(6, 6, 16, 16))
        y = (rng.uniform(size=6) > 0.5).astype(float)
        train(model, [], TrainConfig(epochs=2, batch_size=3, rng_seed=1), dataset=(X, y))
        before = model.predict_scores(X)
        path = tmp_path / "model.ckpt.npz"
        save_checkpoint(model, path, history=[{"epoch": 1, "loss": 0.5, "accuracy": 0.5}])
        loaded, history = load_checkpoint(path)
        assert history[0]["loss"] == 0.5
        after = loaded.predict_scores(X.astype(loaded.dtype))
        assert np.array_equal(before, after)


class TestTraining:
    def test_epochs_validated(self):
        with pytest.raises(ValueError):
            TrainConfig(epochs=0)

    def test_deterministic_history(self):
        rng = np.random.default_rng(16)
        X = rng.normal(0, 1, size=(8, 6, 16, 16))
        y = (rng.uniform(size=8) > 0.5).astype(float)
        cfg = TrainConfig(epochs=3, batch_size=4, rng_seed=5)
        h1, _ = train(PairSimilarityNet(TINY, rng_seed=20), [], cfg, dataset=(X, y))
        h2, _ = train(PairSimilarityNet(TINY, rng_seed=20), [], cfg, dataset=(X, y))
        assert h1 == h2

    def test_overfits_small_synthetic_set(self):
        cfg = ModelConfig(input_size=64)
        model = PairSimilarityNet(cfg, rng_seed=21)
        tensors = []
        labels = []
        for i in range(4):
            img = textured_image(90, 70, 300 + i)
            other = textured_image(90, 70, 400 + i)
            tensors.append(align_pair(img, img, 64))
            labels.append(1.0)
            tensors.append(align_pair(img, other, 64))
            labels.append(0.0)
        X = np.stack(tensors)
        y = np.array(labels)
        history, _ = train(model, [],
                           TrainConfig(epochs=80, batch_size=4, learning_rate=1e-2, rng_seed=3),
                           dataset=(X, y))
        loss, accuracy = evaluate_pairs(model, X, y)
        assert loss < 0.05
        assert accuracy == 1.0


class TestAlignPair:
    def test_output_shape_and_range(self):
        a = textured_image(100, 80, 50)
        b = textured_image(90, 70, 51)
        t = align_pair(a, b, 64)
        assert t.shape == (6, 64, 64)
        assert t.min() >= 0.0 and t.max() <= 1.0

    def test_identity_pair_channels_agree(self):
        img = textured_image(120, 100, 52)
        t, aligned = align_pair_ex(img, img, 96)
        assert aligned
        assert np.abs(t[:3] - t[3:]).max() < 0.02

    def test_planted_warp_recovered(self):
        img = textured_image(160, 130, 53)
        rng = np.random.default_rng(54)
        H = random_homography(rng, max_translation=6.0)
        warped = warp_perspective(img, H, 160, 130)
        t, aligned = align_pair_ex(img, warped, 96)
        assert aligned
        interior = np.s_[:, 16:80, 16:80]
        diff = np.abs(t[:3][interior] - t[3:][interior])
        assert diff.mean() < 0.05
