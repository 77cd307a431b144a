"""Keypoint detection and description: FAST, oriented BRIEF (ORB), dense DAISY."""

from .keypoints import Keypoint, OrbParams
from .fast import detect_fast
from .orientation import compute_orientation
from .pattern import generate_brief_pattern, load_brief_pattern
from .orb import orb_describe, orb_detect_and_describe
from .daisy import DaisyParams, daisy_describe

__all__ = [
    "Keypoint",
    "OrbParams",
    "DaisyParams",
    "detect_fast",
    "compute_orientation",
    "generate_brief_pattern",
    "load_brief_pattern",
    "orb_describe",
    "orb_detect_and_describe",
    "daisy_describe",
]
