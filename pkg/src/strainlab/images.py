"""Grayscale images and subpixel intensity sampling.

Images are stored as float64 arrays normalized to [0, 1] regardless of the
8- or 16-bit source depth. Subpixel sampling uses the cubic-convolution
kernel with a = -0.5, which reproduces affine intensity fields exactly and
gives continuous first derivatives for the correlation solver.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import pngio
from .errors import IoFailure, OutOfBounds

# Rec. 709 luminance weights for color input
_LUMA = np.array([0.2126, 0.7152, 0.0722])

CUBIC_A = -0.5


@dataclass(frozen=True)
class GrayImage:
    """2-D scalar intensity grid with values in [0, 1]."""

    pixels: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.pixels, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError(f"image array must be 2-D and non-empty, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("image contains non-finite intensities")
        if a.min() < 0.0 or a.max() > 1.0:
            raise ValueError(
                f"intensities outside [0, 1]: range [{a.min():.4g}, {a.max():.4g}]"
            )
        a = np.ascontiguousarray(a)
        a.setflags(write=False)
        object.__setattr__(self, "pixels", a)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def from_array(cls, a: np.ndarray, clip: bool = False) -> "GrayImage":
        a = np.asarray(a, dtype=np.float64)
        if clip:
            a = np.clip(a, 0.0, 1.0)
        return cls(a)

    def to_uint(self, depth: int = 8) -> np.ndarray:
        """Quantize to uint8 (depth=8) or uint16 (depth=16)."""
        if depth == 8:
            return np.rint(self.pixels * 255.0).astype(np.uint8)
        if depth == 16:
            return np.rint(self.pixels * 65535.0).astype(np.uint16)
        raise ValueError(f"unsupported depth {depth}")


def load_image(path) -> GrayImage:
    """Load a PNG or PGM file as a normalized grayscale image.

    Color PNG is converted by luminance; 8/16-bit sources divide by the
    max representable value of their depth.
    """
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".png":
        arr, depth = pngio.read_png(path)
    elif ext == ".pgm":
        arr, depth = pngio.read_pgm(path)
    else:
        raise IoFailure(path, f"unsupported image extension '{ext}'")
    scale = 255.0 if depth == 8 else 65535.0
    a = arr.astype(np.float64) / scale
    if a.ndim == 3:
        if a.shape[2] == 2:  # gray + alpha
            a = a[:, :, 0]
        else:  # RGB or RGBA
            a = a[:, :, :3] @ _LUMA
    return GrayImage(np.clip(a, 0.0, 1.0))


def save_image(path, img: GrayImage, depth: int = 8) -> None:
    """Write a grayscale image as PNG or PGM at the requested bit depth."""
    ext = os.path.splitext(str(path))[1].lower()
    data = img.to_uint(depth)
    if ext == ".png":
        pngio.write_png(path, data)
    elif ext == ".pgm":
        pngio.write_pgm(path, data)
    else:
        raise IoFailure(path, f"unsupported image extension '{ext}'")


def cubic_weights(t: np.ndarray, a: float = CUBIC_A) -> np.ndarray:
    """Cubic-convolution weights for the four taps around a sample.

    t is the fractional offset in [0, 1); returns shape t.shape + (4,)
    with weights for nodes at offsets -1, 0, 1, 2.
    """
    t = np.asarray(t, dtype=np.float64)
    w = np.empty(t.shape + (4,))
    t2 = t * t
    t3 = t2 * t
    w[..., 0] = a * (t3 - 2.0 * t2 + t)
    w[..., 1] = (a + 2.0) * t3 - (a + 3.0) * t2 + 1.0
    w[..., 2] = -(a + 2.0) * t3 + (2.0 * a + 3.0) * t2 - a * t
    w[..., 3] = a * (t2 - t3)
    return w


def cubic_weights_deriv(t: np.ndarray, a: float = CUBIC_A) -> np.ndarray:
    """Derivative of cubic_weights with respect to the sample coordinate."""
    t = np.asarray(t, dtype=np.float64)
    w = np.empty(t.shape + (4,))
    t2 = t * t
    w[..., 0] = a * (3.0 * t2 - 4.0 * t + 1.0)
    w[..., 1] = 3.0 * (a + 2.0) * t2 - 2.0 * (a + 3.0) * t
    w[..., 2] = -3.0 * (a + 2.0) * t2 + 2.0 * (2.0 * a + 3.0) * t - a
    w[..., 3] = a * (2.0 * t - 3.0 * t2)
    return w


def _check_domain(img: GrayImage, x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    lo_x, hi_x = 1.0, img.width - 2.0
    lo_y, hi_y = 1.0, img.height - 2.0
    bad = (x < lo_x) | (x > hi_x) | (y < lo_y) | (y > hi_y)
    if np.any(bad):
        i = np.argmax(bad)
        raise OutOfBounds(x.flat[i], y.flat[i])
    return x, y


def sample_region_mask(img: GrayImage, x, y) -> np.ndarray:
    """Boolean mask of coordinates inside the cubic-stencil region."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return (
        (x >= 1.0)
        & (x <= img.width - 2.0)
        & (y >= 1.0)
        & (y <= img.height - 2.0)
    )


def bicubic_sample(img: GrayImage, x, y):
    """Cubic-convolution interpolated intensity at subpixel coordinates.

    Exact at integer pixel coordinates. Coordinates must lie in
    [1, width-2] x [1, height-2]; raises OutOfBounds otherwise.
    Accepts scalars or arrays (broadcast together).
    """
    x, y = _check_domain(img, x, y)
    return _gather(img.pixels, x, y, cubic_weights, cubic_weights)


def bicubic_gradient(img: GrayImage, x, y):
    """(d/dx, d/dy) of the interpolated intensity at subpixel coordinates."""
    x, y = _check_domain(img, x, y)
    gx = _gather(img.pixels, x, y, cubic_weights_deriv, cubic_weights)
    gy = _gather(img.pixels, x, y, cubic_weights, cubic_weights_deriv)
    return gx, gy


def _gather(px: np.ndarray, x, y, wx_fn, wy_fn):
    h, w = px.shape
    ix = np.floor(x).astype(np.intp)
    iy = np.floor(y).astype(np.intp)
    wx = wx_fn(x - ix)
    wy = wy_fn(y - iy)
    # Stencil indices clamped at the upper edge; the t=0 tap there has
    # zero weight so clamping never changes the value.
    cols = np.clip(ix[..., None] + np.arange(-1, 3), 0, w - 1)
    rows = np.clip(iy[..., None] + np.arange(-1, 3), 0, h - 1)
    patch = px[rows[..., :, None], cols[..., None, :]]
    return np.einsum("...ij,...i,...j->...", patch, wy, wx)
