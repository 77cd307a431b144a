"""Keypoint record and ORB pipeline parameters."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class Keypoint:
    """Interest point in source-image coordinates.

    ``x``/``y`` are subpixel column/row positions in the frame of the image
    the keypoint was reported for (the pyramid maps them back to level 0).
    ``angle`` is assigned by the orientation step and stays None until then.
    """

    x: float
    y: float
    angle: float | None = None
    response: float = 0.0
    octave: int = 0


@dataclass(frozen=True)
class OrbParams:
    """Detector/descriptor parameters; defaults follow common ORB practice."""

    n_features: int = 500
    fast_threshold: float = 0.08  # on [0,1] luminance, ~20/255
    pyramid_levels: int = 8
    scale_factor: float = 1.2
    patch_size: int = 31

    def __post_init__(self):
        if self.n_features < 1:
            raise ValueError("n_features must be >= 1")
        if self.scale_factor <= 1.0:
            raise ValueError("scale_factor must be > 1")
        if self.patch_size % 2 != 1:
            raise ValueError("patch_size must be odd")
