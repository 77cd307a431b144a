"""Dense descriptors from Gaussian-smoothed gradient-orientation layers.

A descriptor concentrates one central orientation histogram plus
``histograms`` samples on each of ``rings`` concentric circles; every
8-value block is L2-normalized independently (zero blocks stay zero).
With the defaults this gives (1 + 3*8) * 8 = 200 values per grid point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ImageTooSmall
from ..imagecore import check_gray, gaussian_blur


@dataclass(frozen=True)
class DaisyParams:
    radius: int = 15
    rings: int = 3
    histograms: int = 8  # sample points per ring
    orientations: int = 8

    @property
    def length(self) -> int:
        return (1 + self.rings * self.histograms) * self.orientations


def _orientation_layers(gray: np.ndarray, orientations: int) -> np.ndarray:
    gy, gx = np.gradient(gray)
    layers = []
    for o in range(orientations):
        theta = 2.0 * np.pi * o / orientations
        layers.append(np.maximum(np.cos(theta) * gx + np.sin(theta) * gy, 0.0))
    return np.stack(layers, axis=0)  # (O, h, w)


def _bilinear_stack(stack: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Sample an (O, h, w) stack at float positions -> (n, O)."""
    _, h, w = stack.shape
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (xs - x0)[:, None]
    fy = (ys - y0)[:, None]
    v00 = stack[:, y0, x0].T
    v01 = stack[:, y0, x1].T
    v10 = stack[:, y1, x0].T
    v11 = stack[:, y1, x1].T
    return (v00 * (1 - fx) * (1 - fy) + v01 * fx * (1 - fy)
            + v10 * (1 - fx) * fy + v11 * fx * fy)


def _normalize_blocks(desc: np.ndarray, orientations: int) -> np.ndarray:
    blocks = desc.reshape(desc.shape[0], -1, orientations)
    norms = np.linalg.norm(blocks, axis=2, keepdims=True)
    safe = np.where(norms > 1e-12, norms, 1.0)
    return (blocks / safe).reshape(desc.shape[0], -1)


def daisy_describe(img, step: int, params: DaisyParams = DaisyParams()) -> np.ndarray:
    """Dense descriptors on a regular grid with the given step.

    The grid has exactly ``floor((W - 2r) / step) * floor((H - 2r) / step)``
    points, ordered row-major. Constant images yield all-zero descriptors.
    """
    gray = check_gray(img)
    h, w = gray.shape
    r = params.radius
    if w <= 2 * r or h <= 2 * r:
        raise ImageTooSmall(f"{w}x{h}: needs more than {2 * r} pixels per side")
    if step < 1:
        raise ValueError("step must be >= 1")

    layers = _orientation_layers(gray, params.orientations)
    ring_radii = [r * (j + 1) / params.rings for j in range(params.rings)]
    sigma_center = r / (2.0 * params.rings)
    sigmas = [sigma_center] + [rr / 2.0 for rr in ring_radii]
    smoothed: dict[float, np.ndarray] = {}
    for s in sigmas:
        if s not in smoothed:
            smoothed[s] = np.stack([gaussian_blur(layer, s) for layer in layers], axis=0)

    nx = (w - 2 * r) // step
    ny = (h - 2 * r) // step
    gx = r + step * np.arange(nx)
    gy = r + step * np.arange(ny)
    cx, cy = np.meshgrid(gx, gy)
    cx = cx.ravel().astype(np.float64)
    cy = cy.ravel().astype(np.float64)

    blocks = [smoothed[sigma_center][:, cy.astype(np.intp), cx.astype(np.intp)].T]
    for rr, s in zip(ring_radii, sigmas[1:]):
        for k in range(params.histograms):
            phi = 2.0 * np.pi * k / params.histograms
            sx = cx + rr * np.cos(phi)
            sy = cy + rr * np.sin(phi)
            blocks.append(_bilinear_stack(smoothed[s], sx, sy))
    desc = np.concatenate(blocks, axis=1)
    return _normalize_blocks(desc, params.orientations)
