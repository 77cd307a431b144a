"""The 256-pair point-comparison pattern used by the binary descriptor.

The pattern ships as a versioned data file so descriptors stay stable
across builds; ``generate_brief_pattern`` reproduces it bit-for-bit (a test
pins file == generator). Points are drawn from an isotropic Gaussian with
sigma = patch/5 and rejected outside a radius-13 disc so that any rotation
of the pattern stays inside a 31x31 patch.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

PATTERN_FILE = "brief_pattern_v1.tsv"
PATTERN_SEED = 20211101
N_PAIRS = 256
_SIGMA = 31 / 5.0
_MAX_NORM = 13.0


def _draw_point(rng) -> tuple[int, int]:
    while True:
        x, y = rng.normal(0.0, _SIGMA, size=2)
        if x * x + y * y <= _MAX_NORM * _MAX_NORM:
            return int(round(x)), int(round(y))


def generate_brief_pattern(seed: int = PATTERN_SEED) -> np.ndarray:
    """(256, 4) int array of (x1, y1, x2, y2) comparison pairs."""
    rng = np.random.default_rng(seed)
    pairs = []
    while len(pairs) < N_PAIRS:
        x1, y1 = _draw_point(rng)
        x2, y2 = _draw_point(rng)
        if (x1, y1) == (x2, y2):
            continue
        pairs.append((x1, y1, x2, y2))
    return np.array(pairs, dtype=np.int64)


def load_brief_pattern() -> np.ndarray:
    """Load the shipped pattern file."""
    text = resources.files("neardup.data").joinpath(PATTERN_FILE).read_text()
    rows = [line.split("\t") for line in text.strip().splitlines()
            if line and not line.startswith("#")]
    arr = np.array(rows, dtype=np.int64)
    if arr.shape != (N_PAIRS, 4):
        raise ValueError(f"pattern file has shape {arr.shape}, expected (256, 4)")
    return arr


def write_pattern_file(path) -> None:
    arr = generate_brief_pattern()
    lines = [f"# binary descriptor comparison pattern v1 (seed {PATTERN_SEED})"]
    lines += ["\t".join(str(v) for v in row) for row in arr]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
