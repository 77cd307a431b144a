"""Raster primitives shared by every similarity technique.

Conventions used throughout the package:

* RGB raster: ``(height, width, 3)`` uint8 numpy array, row-major.
* Gray image: ``(height, width)`` float64 numpy array with values in [0, 1].
* Coordinates are ``(x, y)`` with x = column, y = row.
* A homography is a 3x3 float64 matrix mapping source ``(x, y, 1)`` to
  destination homogeneous coordinates.

Codec work (PNG/JPEG) is delegated to Pillow; the numeric operations are
implemented here so their behaviour is pinned exactly (bilinear sampling,
clamp-to-edge blur, black out-of-bounds warp fill).
"""

from __future__ import annotations

import io

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy.ndimage import correlate1d

from .errors import (
    MalformedImage,
    NonPositiveSigma,
    SingularHomography,
    UnsupportedFormat,
    ZeroDimension,
)

GRAY_WEIGHTS = (0.299, 0.587, 0.114)  # Rec. 601 luma

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_JPEG_MAGIC = b"\xff\xd8\xff"


def check_rgb(img) -> np.ndarray:
    """Validate and return an RGB raster as a contiguous uint8 array."""
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected (h, w, 3) RGB raster, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("raster dimensions must be >= 1")
    if arr.dtype != np.uint8:
        raise ValueError(f"expected uint8 raster, got {arr.dtype}")
    return np.ascontiguousarray(arr)


def check_gray(img) -> np.ndarray:
    """Validate and return a gray image as a float64 array in [0, 1]."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected (h, w) gray image, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("gray image dimensions must be >= 1")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("gray values must lie in [0, 1]")
    return arr


def decode_image(data: bytes) -> np.ndarray:
    """Decode a PNG or JPEG byte stream to an RGB raster.

    Raises UnsupportedFormat for any other container and MalformedImage for
    a truncated or corrupt stream of a supported container.
    """
    if not (data.startswith(_PNG_MAGIC) or data.startswith(_JPEG_MAGIC)):
        raise UnsupportedFormat("not a PNG or JPEG stream")
    try:
        with Image.open(io.BytesIO(data)) as im:
            rgb = im.convert("RGB")
            arr = np.asarray(rgb, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise MalformedImage(str(exc)) from exc
    return check_rgb(arr)


def encode_png(img) -> bytes:
    """Encode an RGB raster as PNG bytes (lossless round-trip)."""
    arr = check_rgb(img)
    buf = io.BytesIO()
    Image.fromarray(arr, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def load_image(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode_image(fh.read())


def save_png(img, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_png(img))


def to_gray(img) -> np.ndarray:
    """RGB raster -> luminance in [0, 1] using Rec. 601 weights."""
    arr = check_rgb(img).astype(np.float64)
    wr, wg, wb = GRAY_WEIGHTS
    return (wr * arr[:, :, 0] + wg * arr[:, :, 1] + wb * arr[:, :, 2]) / 255.0


def _bilinear_axes(src_len: int, dst_len: int):
    """Center-aligned sample positions for one axis of a bilinear resize."""
    pos = (np.arange(dst_len, dtype=np.float64) + 0.5) * (src_len / dst_len) - 0.5
    pos = np.clip(pos, 0.0, src_len - 1.0)
    lo = np.floor(pos).astype(np.intp)
    hi = np.minimum(lo + 1, src_len - 1)
    frac = pos - lo
    return lo, hi, frac


def resize(img, new_width: int, new_height: int) -> np.ndarray:
    """Bilinear resize of an RGB raster or gray image.

    Output has exactly the requested dimensions; same-size input is
    returned pixel-identical.
    """
    if new_width < 1 or new_height < 1:
        raise ZeroDimension(f"requested {new_width}x{new_height}")
    arr = np.asarray(img)
    is_rgb = arr.ndim == 3
    src = check_rgb(arr).astype(np.float64) if is_rgb else check_gray(arr)
    h, w = src.shape[:2]

    x0, x1, fx = _bilinear_axes(w, new_width)
    y0, y1, fy = _bilinear_axes(h, new_height)
    top = src[y0][:, x0] * (1 - fx)[None, :, None] if is_rgb else src[y0][:, x0] * (1 - fx)
    if is_rgb:
        top = top + src[y0][:, x1] * fx[None, :, None]
        bot = src[y1][:, x0] * (1 - fx)[None, :, None] + src[y1][:, x1] * fx[None, :, None]
        out = top * (1 - fy)[:, None, None] + bot * fy[:, None, None]
        return np.clip(np.rint(out), 0, 255).astype(np.uint8)
    top = top + src[y0][:, x1] * fx
    bot = src[y1][:, x0] * (1 - fx) + src[y1][:, x1] * fx
    return top * (1 - fy)[:, None] + bot * fy[:, None]


def gaussian_kernel(sigma: float) -> np.ndarray:
    """1-D Gaussian kernel with radius ceil(3*sigma), L1-normalized."""
    if sigma <= 0:
        raise NonPositiveSigma(f"sigma={sigma}")
    radius = int(np.ceil(3.0 * sigma))
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(xs**2) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur(img, sigma: float) -> np.ndarray:
    """Separable Gaussian blur of a gray image with clamp-to-edge borders."""
    gray = check_gray(img)
    k = gaussian_kernel(sigma)
    out = correlate1d(gray, k, axis=0, mode="nearest")
    out = correlate1d(out, k, axis=1, mode="nearest")
    # clamp-to-edge convolution of values in [0,1] stays in [0,1] up to fp noise
    return np.clip(out, 0.0, 1.0)


def identity_homography() -> np.ndarray:
    return np.eye(3, dtype=np.float64)


def normalize_homography(H) -> np.ndarray:
    """Scale H so the bottom-right element is 1."""
    H = np.asarray(H, dtype=np.float64)
    if H.shape != (3, 3):
        raise ValueError(f"expected 3x3 homography, got {H.shape}")
    if abs(H[2, 2]) < 1e-12:
        raise SingularHomography("h33 is zero; cannot normalize")
    return H / H[2, 2]


def apply_homography(H, xs, ys):
    """Map point arrays through H, returning (x', y') float arrays."""
    H = np.asarray(H, dtype=np.float64)
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    denom = H[2, 0] * xs + H[2, 1] * ys + H[2, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        xp = (H[0, 0] * xs + H[0, 1] * ys + H[0, 2]) / denom
        yp = (H[1, 0] * xs + H[1, 1] * ys + H[1, 2]) / denom
    return xp, yp


def warp_perspective(img, H, out_width: int, out_height: int) -> np.ndarray:
    """Inverse-mapped bilinear warp of an RGB raster.

    ``H`` maps source coordinates to destination coordinates; samples that
    fall outside the source frame produce black (0, 0, 0).
    """
    arr = check_rgb(img)
    if out_width < 1 or out_height < 1:
        raise ZeroDimension(f"requested {out_width}x{out_height}")
    H = np.asarray(H, dtype=np.float64)
    if H.shape != (3, 3):
        raise ValueError(f"expected 3x3 homography, got {H.shape}")
    det = np.linalg.det(H)
    if not np.isfinite(det) or abs(det) < 1e-12:
        raise SingularHomography(f"determinant {det}")
    Hinv = np.linalg.inv(H)

    h, w = arr.shape[:2]
    dx, dy = np.meshgrid(np.arange(out_width, dtype=np.float64),
                         np.arange(out_height, dtype=np.float64))
    sx, sy = apply_homography(Hinv, dx, dy)
    valid = np.isfinite(sx) & np.isfinite(sy)
    eps = 1e-6  # fp guard so near-identity warps keep their boundary pixels
    valid &= (sx >= -eps) & (sx <= w - 1.0 + eps) & (sy >= -eps) & (sy <= h - 1.0 + eps)
    sxc = np.clip(np.where(valid, sx, 0.0), 0.0, w - 1.0)
    syc = np.clip(np.where(valid, sy, 0.0), 0.0, h - 1.0)

    x0 = np.floor(sxc).astype(np.intp)
    y0 = np.floor(syc).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (sxc - x0)[..., None]
    fy = (syc - y0)[..., None]

    src = arr.astype(np.float64)
    out = (src[y0, x0] * (1 - fx) * (1 - fy)
           + src[y0, x1] * fx * (1 - fy)
           + src[y1, x0] * (1 - fx) * fy
           + src[y1, x1] * fx * fy)
    out[~valid] = 0.0
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)
