"""Synthetic image builders shared by the test suite.

All builders are seeded and deterministic. `textured_image` produces rasters
with plenty of corners and distinctive local structure so that feature
pipelines have something to work with.
"""

from __future__ import annotations

import numpy as np


def textured_image(width: int, height: int, seed: int, n_shapes: int = 40) -> np.ndarray:
    """RGB image of random rectangles, discs and lines over smooth noise."""
    rng = np.random.default_rng(seed)
    # smooth low-frequency background
    small = rng.uniform(40, 215, size=(8, 8, 3))
    ys = np.linspace(0, 7, height)
    xs = np.linspace(0, 7, width)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, 7)
    x1 = np.minimum(x0 + 1, 7)
    fy = (ys - y0)[:, None, None]
    fx = (xs - x0)[None, :, None]
    img = (small[y0][:, x0] * (1 - fx) * (1 - fy) + small[y0][:, x1] * fx * (1 - fy)
           + small[y1][:, x0] * (1 - fx) * fy + small[y1][:, x1] * fx * fy)

    yy, xx = np.mgrid[0:height, 0:width]
    for _ in range(n_shapes):
        color = rng.uniform(0, 255, size=3)
        kind = rng.integers(0, 3)
        if kind == 0:  # rectangle
            w = int(rng.integers(4, max(5, width // 4)))
            h = int(rng.integers(4, max(5, height // 4)))
            x = int(rng.integers(0, max(1, width - w)))
            y = int(rng.integers(0, max(1, height - h)))
            img[y:y + h, x:x + w] = color
        elif kind == 1:  # disc
            r = int(rng.integers(3, max(4, min(width, height) // 6)))
            cx = int(rng.integers(r, width - r)) if width > 2 * r else width // 2
            cy = int(rng.integers(r, height - r)) if height > 2 * r else height // 2
            mask = (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
            img[mask] = color
        else:  # thick line segment
            x1_, y1_ = rng.integers(0, width), rng.integers(0, height)
            x2_, y2_ = rng.integers(0, width), rng.integers(0, height)
            steps = max(abs(int(x2_ - x1_)), abs(int(y2_ - y1_)), 1)
            t = np.linspace(0, 1, steps * 2)
            px = np.clip(np.round(x1_ + (x2_ - x1_) * t).astype(int), 0, width - 1)
            py = np.clip(np.round(y1_ + (y2_ - y1_) * t).astype(int), 0, height - 1)
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    img[np.clip(py + dy, 0, height - 1), np.clip(px + dx, 0, width - 1)] = color

    img += rng.normal(0, 3, size=img.shape)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def smooth_image(width: int, height: int, seed: int) -> np.ndarray:
    """Smooth low-frequency RGB image (safe for resampling round-trips)."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    img = np.zeros((height, width, 3))
    for c in range(3):
        phase = rng.uniform(0, 2 * np.pi, size=4)
        freq = rng.uniform(0.5, 2.0, size=4)
        img[:, :, c] = (
            np.sin(2 * np.pi * freq[0] * xx / width + phase[0])
            + np.cos(2 * np.pi * freq[1] * yy / height + phase[1])
            + np.sin(2 * np.pi * freq[2] * (xx + yy) / (width + height) + phase[2])
            + np.cos(2 * np.pi * freq[3] * (xx - yy) / (width + height) + phase[3])
        )
    img = (img - img.min()) / (img.max() - img.min())
    return np.clip(np.rint(img * 255), 0, 255).astype(np.uint8)


def scrambled(img: np.ndarray, seed: int) -> np.ndarray:
    """Random permutation of an image's pixels (same color multiset)."""
    rng = np.random.default_rng(seed)
    h, w = img.shape[:2]
    flat = img.reshape(h * w, 3).copy()
    rng.shuffle(flat, axis=0)
    return flat.reshape(h, w, 3)


def block_shuffled(img: np.ndarray, seed: int, block: int = 8) -> np.ndarray:
    """Shuffle an image as a grid of small blocks (same palette, new layout)."""
    rng = np.random.default_rng(seed)
    h, w = img.shape[:2]
    bh, bw = h // block, w // block
    cropped = img[:bh * block, :bw * block]
    tiles = cropped.reshape(bh, block, bw, block, 3).transpose(0, 2, 1, 3, 4)
    flat = tiles.reshape(bh * bw, block, block, 3).copy()
    rng.shuffle(flat, axis=0)
    out = flat.reshape(bh, bw, block, block, 3).transpose(0, 2, 1, 3, 4)
    out = out.reshape(bh * block, bw * block, 3)
    full = img.copy()
    full[:bh * block, :bw * block] = out
    return full


def event_chains(other_image):
    """Eight modification chains spanning scale (<=3x), crop (>=60% area
    retained), text overlay, stitching, and photometric changes."""
    from neardup.augment import Modification as M
    return [
        [M("scale", {"fx": 2.8, "fy": 2.8})],
        [M("scale", {"fx": 0.55, "fy": 0.55})],
        [M("crop", {"left": 10, "top": 8, "width": 136, "height": 102}),
         M("scale", {"fx": 1.5, "fy": 1.5})],
        [M("add_text", {"text": "BREAKING NEWS", "x": 6, "y": 6, "scale": 2,
                        "color": [255, 255, 0]})],
        [M("stitch", {"side": "right", "other_image": other_image}),
         M("scale", {"fx": 0.8, "fy": 0.8})],
        [M("crop", {"left": 16, "top": 12, "width": 128, "height": 95}),
         M("add_text", {"text": "VIRAL", "x": 10, "y": 70, "scale": 2,
                        "color": [255, 255, 255]})],
        [M("brightness", {"delta": 35}), M("noise", {"stddev": 0.02})],
        [M("contrast", {"factor": 1.4}),
         M("color_shift", {"dr": 25, "dg": -15, "db": 10})],
    ]


def make_event(out_dir, seed: int, width: int = 160, height: int = 120):
    """One synthetic retrieval event with ground truth known by construction.

    Returns (query_path, entries) where entries is a list of
    (path, "similar"|"dissimilar"): 8 modified copies of the query and 12
    distractors (3 pixel scrambles, 3 block shuffles, 6 unrelated textures).
    """
    from pathlib import Path

    from neardup.augment import compose
    from neardup.imagecore import save_png

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    query = textured_image(width, height, seed)
    query_path = out_dir / "query.png"
    save_png(query, query_path)

    entries = []
    stitch_partner = textured_image(width, height, seed + 9000)
    for i, chain in enumerate(event_chains(stitch_partner)):
        img = compose(query, chain, seed=seed * 100 + i)
        path = out_dir / f"copy_{i}.png"
        save_png(img, path)
        entries.append((str(path), "similar"))
    for i in range(3):
        path = out_dir / f"scramble_{i}.png"
        save_png(scrambled(query, seed + 200 + i), path)
        entries.append((str(path), "dissimilar"))
    for i in range(3):
        path = out_dir / f"shuffle_{i}.png"
        save_png(block_shuffled(query, seed + 300 + i), path)
        entries.append((str(path), "dissimilar"))
    for i in range(6):
        path = out_dir / f"distractor_{i}.png"
        save_png(textured_image(width, height, seed + 400 + i), path)
        entries.append((str(path), "dissimilar"))
    return str(query_path), entries


def random_homography(rng, max_translation: float = 15.0) -> np.ndarray:
    """Random well-conditioned homography (mild affine + tiny perspective)."""
    H = np.eye(3)
    H[:2, :2] += rng.normal(0, 0.08, size=(2, 2))
    H[:2, 2] = rng.uniform(-max_translation, max_translation, size=2)
    H[2, :2] = rng.normal(0, 1e-4, size=2)
    return H
