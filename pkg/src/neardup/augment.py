"""Image modification operators and synthetic labeled-pair generation.

Supported modifications mirror the alterations near-duplicates show in the
wild: crop, scale, blur, text overlay, stitching with another image, noise,
color shift, brightness, contrast and a mild perspective distortion. Every
operator is deterministic for a given seed, so a stored modification chain
can be replayed to reproduce its output bit-exactly (PNG storage).

`generate_pairs` turns a directory of source images into a balanced
labeled dataset: for each source, a randomly-chained modified copy (label
"similar") and a pairing with a distinct source (label "dissimilar"),
described by an NDJSON manifest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import EmptySourceDir, InvalidSpec, MalformedImage, UnsupportedFormat
from .geometry import dlt_homography
from .imagecore import check_rgb, gaussian_blur, load_image, resize, save_png, warp_perspective

KINDS = ("crop", "scale", "blur", "add_text", "stitch", "noise",
         "color_shift", "brightness", "contrast", "distort")

FONT_FILE = "font5x7_v1.tsv"
_font_cache: dict[int, tuple[int, ...]] | None = None


@dataclass(frozen=True)
class Modification:
    """One modification step: a kind from KINDS plus its parameters."""

    kind: str
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": self.params}

    @staticmethod
    def from_json(obj: dict) -> "Modification":
        return Modification(kind=obj["kind"], params=dict(obj["params"]))


@dataclass(frozen=True)
class LabeledPair:
    """A manifest row: two image paths plus the similar/dissimilar label.

    Similar pairs carry the modification chain that produced image_b from
    image_a (and the chain seed); dissimilar pairs come from two distinct
    source images and carry no chain.
    """

    image_a: str
    image_b: str
    label: str  # "similar" | "dissimilar"
    chain: list[Modification] | None = None
    seed: int | None = None


def _font() -> dict[int, tuple[int, ...]]:
    global _font_cache
    if _font_cache is None:
        text = resources.files("neardup.data").joinpath(FONT_FILE).read_text()
        table = {}
        for line in text.strip().splitlines():
            if not line or line.startswith("#"):
                continue
            code, cols = line.split("\t")
            table[int(code)] = tuple(int(c, 16) for c in cols.split())
        _font_cache = table
    return _font_cache


def draw_text(img, text: str, x: int, y: int, scale: int = 1, color=(255, 255, 255)) -> np.ndarray:
    """Rasterize text with the bundled 5x7 font; out-of-frame pixels are clipped."""
    out = check_rgb(img).copy()
    h, w = out.shape[:2]
    font = _font()
    col = np.array(color, dtype=np.uint8)
    cx = x
    for ch in text.upper():
        glyph = font.get(ord(ch))
        if glyph is None:
            glyph = font[ord("?")]
        for gc, bits in enumerate(glyph):
            for gr in range(7):
                if (bits >> gr) & 1:
                    y0 = y + gr * scale
                    x0 = cx + gc * scale
                    ys = slice(max(y0, 0), min(y0 + scale, h))
                    xs = slice(max(x0, 0), min(x0 + scale, w))
                    if ys.start < ys.stop and xs.start < xs.stop:
                        out[ys, xs] = col
        cx += 6 * scale  # 5 columns + 1 spacing
    return out


def _blur_rgb(img, sigma: float) -> np.ndarray:
    chans = [gaussian_blur(img[:, :, c].astype(np.float64) / 255.0, sigma) for c in range(3)]
    return np.clip(np.rint(np.stack(chans, axis=2) * 255.0), 0, 255).astype(np.uint8)


def _resolve_other(params: dict, resolve) -> np.ndarray:
    if "other_image" in params:
        return check_rgb(params["other_image"])
    if "other" in params:
        loader = resolve if resolve is not None else load_image
        return check_rgb(loader(params["other"]))
    raise InvalidSpec("stitch requires 'other' (path) or 'other_image'")


def apply_modification(img, spec: Modification, rng_seed: int = 0, resolve=None) -> np.ndarray:
    """Apply one modification; deterministic for a given seed.

    ``resolve`` maps a stitch partner path to a decoded raster (defaults to
    loading from disk).
    """
    arr = check_rgb(img)
    h, w = arr.shape[:2]
    p = spec.params
    rng = np.random.default_rng(rng_seed)

    if spec.kind == "crop":
        left, top = int(p["left"]), int(p["top"])
        cw, ch = int(p["width"]), int(p["height"])
        if left < 0 or top < 0 or cw < 1 or ch < 1 or left + cw > w or top + ch > h:
            raise InvalidSpec(f"crop rect {p} outside {w}x{h} source")
        return arr[top:top + ch, left:left + cw].copy()

    if spec.kind == "scale":
        fx, fy = float(p["fx"]), float(p["fy"])
        if fx <= 0 or fy <= 0:
            raise InvalidSpec("scale factors must be > 0")
        nw, nh = max(1, round(w * fx)), max(1, round(h * fy))
        return resize(arr, nw, nh)

    if spec.kind == "blur":
        sigma = float(p["sigma"])
        if sigma <= 0:
            raise InvalidSpec("blur sigma must be > 0")
        return _blur_rgb(arr, sigma)

    if spec.kind == "add_text":
        return draw_text(arr, str(p["text"]), int(p["x"]), int(p["y"]),
                         scale=int(p.get("scale", 1)),
                         color=tuple(p.get("color", (255, 255, 255))))

    if spec.kind == "stitch":
        side = p.get("side")
        if side not in ("left", "right", "top", "bottom"):
            raise InvalidSpec(f"stitch side {side!r}")
        other = _resolve_other(p, resolve)
        if side in ("left", "right"):
            oh, ow = other.shape[:2]
            other = resize(other, max(1, round(ow * h / oh)), h)
            return np.hstack([other, arr]) if side == "left" else np.hstack([arr, other])
        oh, ow = other.shape[:2]
        other = resize(other, w, max(1, round(oh * w / ow)))
        return np.vstack([other, arr]) if side == "top" else np.vstack([arr, other])

    if spec.kind == "noise":
        stddev = float(p["stddev"])
        if stddev < 0:
            raise InvalidSpec("noise stddev must be >= 0")
        noisy = arr.astype(np.float64) + rng.normal(0, stddev * 255.0, size=arr.shape)
        return np.clip(np.rint(noisy), 0, 255).astype(np.uint8)

    if spec.kind == "color_shift":
        delta = np.array([p.get("dr", 0), p.get("dg", 0), p.get("db", 0)], dtype=np.float64)
        return np.clip(arr.astype(np.float64) + delta, 0, 255).astype(np.uint8)

    if spec.kind == "brightness":
        return np.clip(arr.astype(np.float64) + float(p["delta"]), 0, 255).astype(np.uint8)

    if spec.kind == "contrast":
        factor = float(p["factor"])
        if factor <= 0:
            raise InvalidSpec("contrast factor must be > 0")
        out = (arr.astype(np.float64) - 128.0) * factor + 128.0
        return np.clip(np.rint(out), 0, 255).astype(np.uint8)

    if spec.kind == "distort":
        strength = float(p.get("strength", 0.03))
        if not 0 < strength <= 0.05:
            raise InvalidSpec("distort strength must be in (0, 0.05]")
        corners = np.array([[0, 0], [w - 1.0, 0], [w - 1.0, h - 1.0], [0, h - 1.0]])
        jitter = rng.uniform(-strength, strength, size=(4, 2)) * np.array([w, h])
        H = dlt_homography(corners, corners + jitter)
        return warp_perspective(arr, H, w, h)

    raise InvalidSpec(f"unknown modification kind {spec.kind!r}")


def stage_seed(seed: int, index: int) -> int:
    """Per-stage seed derivation used by compose (documented for replay)."""
    return (int(seed) * 1_000_003 + index) % (2**63)


def compose(img, specs: list[Modification], seed: int = 0, resolve=None) -> np.ndarray:
    """Apply modifications left to right; failures name the offending stage."""
    out = check_rgb(img)
    for i, spec in enumerate(specs):
        try:
            out = apply_modification(out, spec, rng_seed=stage_seed(seed, i), resolve=resolve)
        except InvalidSpec as exc:
            raise InvalidSpec(f"stage {i} ({spec.kind}): {exc}") from exc
    return out


_TEXT_SNIPPETS = ("BREAKING", "VIRAL", "SHARE THIS", "EXCLUSIVE", "NEWS 24",
                  "MUST SEE", "LIVE", "ALERT", "TRENDING NOW")


def sample_chain(rng, width: int, height: int, stitch_paths: list[str],
                 n_min: int = 1, n_max: int = 4) -> list[Modification]:
    """Random 1-4 step modification chain valid for the given source dims."""
    n = int(rng.integers(n_min, n_max + 1))
    chain: list[Modification] = []
    w, h = width, height
    for _ in range(n):
        kinds = list(KINDS)
        if not stitch_paths:
            kinds.remove("stitch")
        if min(w, h) < 24:
            kinds = [k for k in kinds if k not in ("crop", "distort")]
        kind = kinds[int(rng.integers(0, len(kinds)))]
        if kind == "crop":
            rw = int(round(w * rng.uniform(0.62, 0.95)))
            rh = int(round(h * rng.uniform(0.62, 0.95)))
            rw, rh = max(rw, 8), max(rh, 8)
            left = int(rng.integers(0, w - rw + 1))
            top = int(rng.integers(0, h - rh + 1))
            chain.append(Modification("crop", {"left": left, "top": top,
                                               "width": rw, "height": rh}))
            w, h = rw, rh
        elif kind == "scale":
            fx = float(rng.uniform(0.6, 2.6))
            fy = float(np.clip(fx * rng.uniform(0.9, 1.1), 0.5, 3.0))
            chain.append(Modification("scale", {"fx": round(fx, 3), "fy": round(fy, 3)}))
            w, h = max(1, round(w * fx)), max(1, round(h * fy))
        elif kind == "blur":
            chain.append(Modification("blur", {"sigma": round(float(rng.uniform(0.6, 1.6)), 2)}))
        elif kind == "add_text":
            text = _TEXT_SNIPPETS[int(rng.integers(0, len(_TEXT_SNIPPETS)))]
            scale = int(rng.integers(1, 3))
            x = int(rng.integers(0, max(1, w - 6 * scale * len(text))))
            y = int(rng.integers(0, max(1, h - 8 * scale)))
            chain.append(Modification("add_text", {
                "text": text, "x": x, "y": y, "scale": scale,
                "color": [int(v) for v in rng.integers(0, 256, size=3)]}))
        elif kind == "stitch":
            side = ("left", "right", "top", "bottom")[int(rng.integers(0, 4))]
            other = stitch_paths[int(rng.integers(0, len(stitch_paths)))]
            chain.append(Modification("stitch", {"side": side, "other": other}))
            w, h = (w * 2, h) if side in ("left", "right") else (w, h * 2)  # approx
        elif kind == "noise":
            chain.append(Modification("noise", {"stddev": round(float(rng.uniform(0.01, 0.05)), 3)}))
        elif kind == "color_shift":
            dr, dg, db = (int(v) for v in rng.integers(-35, 36, size=3))
            chain.append(Modification("color_shift", {"dr": dr, "dg": dg, "db": db}))
        elif kind == "brightness":
            chain.append(Modification("brightness", {"delta": int(rng.integers(-40, 41))}))
        elif kind == "contrast":
            chain.append(Modification("contrast", {"factor": round(float(rng.uniform(0.7, 1.5)), 2)}))
        elif kind == "distort":
            chain.append(Modification("distort", {"strength": round(float(rng.uniform(0.01, 0.04)), 3)}))
    return chain


def write_manifest(path, pairs: list[LabeledPair], skipped: list[dict] | None = None) -> None:
    with open(path, "w") as fh:
        for rec in skipped or []:
            fh.write(json.dumps(rec) + "\n")
        for pair in pairs:
            row = {"a": pair.image_a, "b": pair.image_b, "label": pair.label,
                   "chain": [m.to_json() for m in pair.chain] if pair.chain else None,
                   "seed": pair.seed}
            fh.write(json.dumps(row) + "\n")


def read_manifest(path) -> list[LabeledPair]:
    pairs = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if "skipped" in obj:
                continue
            chain = [Modification.from_json(m) for m in obj["chain"]] if obj.get("chain") else None
            pairs.append(LabeledPair(obj["a"], obj["b"], obj["label"], chain, obj.get("seed")))
    return pairs


def generate_pairs(source_dir, out_dir, pairs_per_image: int, seed: int) -> list[LabeledPair]:
    """Build a balanced similar/dissimilar pair dataset from a source directory.

    Writes PNG copies of sources, modified copies, and manifest.ndjson into
    ``out_dir``; returns the pair list. Undecodable sources are skipped and
    recorded in the manifest. Deterministic for a given seed.
    """
    source_dir = Path(source_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    skipped: list[dict] = []
    sources: list[tuple[str, np.ndarray]] = []
    for f in sorted(source_dir.iterdir()):
        if not f.is_file():
            continue
        try:
            sources.append((f.stem, load_image(f)))
        except (MalformedImage, UnsupportedFormat) as exc:
            skipped.append({"skipped": str(f), "reason": str(exc)})
    if len(sources) < 2:
        raise EmptySourceDir(f"{source_dir}: need >= 2 decodable images, found {len(sources)}")

    # canonical PNG copies so chains replay bit-exactly from disk
    src_paths: dict[str, str] = {}
    for stem, img in sources:
        path = out_dir / f"src_{stem}.png"
        save_png(img, path)
        src_paths[stem] = str(path)

    pairs: list[LabeledPair] = []
    root = np.random.SeedSequence(seed)
    for i, (stem, img) in enumerate(sources):
        for p in range(pairs_per_image):
            ss = np.random.SeedSequence([seed, i, p])
            chain_seed = int(ss.generate_state(1, dtype=np.uint64)[0] % (2**63))
            rng = np.random.default_rng(ss)
            h, w = img.shape[:2]
            others = [path for s, path in src_paths.items() if s != stem]
            chain = sample_chain(rng, w, h, others)
            modified = compose(img, chain, seed=chain_seed)
            mod_path = out_dir / f"mod_{stem}_{p}.png"
            save_png(modified, mod_path)
            pairs.append(LabeledPair(src_paths[stem], str(mod_path), "similar",
                                     chain, chain_seed))
            j = int(rng.integers(0, len(sources) - 1))
            other_stem = [s for s, _ in sources if s != stem][j]
            pairs.append(LabeledPair(src_paths[stem], src_paths[other_stem], "dissimilar"))
    write_manifest(out_dir / "manifest.ndjson", pairs, skipped)
    return pairs
