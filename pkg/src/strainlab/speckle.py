"""Synthetic speckle images and warps with exactly known deformation.

The speckle generator replaces an unknown surface texture with a
reproducible one; the warp functions deform it through a known map phi so
every downstream measurement has a closed-form oracle: the displacement
u(X) = phi(X) - X and the deformation gradient dphi/dX.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateParameters, OutOfBounds
from .images import GrayImage, bicubic_sample, sample_region_mask
from .kinematics import log_strain

BACKGROUND = 0.5


@dataclass(frozen=True)
class SpecklePattern:
    """Parameters of a reproducible Gaussian-dot speckle texture."""

    seed: int = 0
    dots_per_kilopixel: float = 60.0
    dot_radius_mean: float = 2.0
    dot_radius_sd: float = 0.5
    contrast: float = 0.8

    def __post_init__(self):
        if self.dots_per_kilopixel <= 0:
            raise DegenerateParameters("dot density must be > 0")
        if self.dot_radius_mean <= 0.5:
            raise DegenerateParameters("dot radius must exceed 0.5 px")


def render_speckle(pattern: SpecklePattern, width: int, height: int) -> GrayImage:
    """Deterministic Gaussian-dot speckle on a mid-gray background.

    Same pattern and size give a bit-identical image.
    """
    if width < 64 or height < 64:
        raise DegenerateParameters(f"image must be at least 64x64, got {width}x{height}")
    if pattern.contrast <= 0.0:
        raise DegenerateParameters("contrast must be > 0 for a usable texture")

    n_dots = int(round(pattern.dots_per_kilopixel * width * height / 1000.0))
    if n_dots < 10:
        raise DegenerateParameters(f"parameters yield only {n_dots} dots (< 10)")

    rng = np.random.default_rng(pattern.seed)
    cx = rng.uniform(0.0, width, n_dots)
    cy = rng.uniform(0.0, height, n_dots)
    radius = np.clip(
        rng.normal(pattern.dot_radius_mean, pattern.dot_radius_sd, n_dots), 0.5, None
    )
    amp = pattern.contrast * rng.uniform(0.5, 1.0, n_dots)
    sign = np.where(rng.random(n_dots) < 0.5, -1.0, 1.0)

    img = np.full((height, width), BACKGROUND)
    sigma = radius / 2.0
    reach = np.ceil(3.0 * sigma).astype(int)
    for k in range(n_dots):
        x0 = max(int(np.floor(cx[k])) - reach[k], 0)
        x1 = min(int(np.ceil(cx[k])) + reach[k] + 1, width)
        y0 = max(int(np.floor(cy[k])) - reach[k], 0)
        y1 = min(int(np.ceil(cy[k])) + reach[k] + 1, height)
        if x0 >= x1 or y0 >= y1:
            continue
        xs = np.arange(x0, x1) - cx[k]
        ys = np.arange(y0, y1) - cy[k]
        d2 = ys[:, None] ** 2 + xs[None, :] ** 2
        img[y0:y1, x0:x1] += sign[k] * amp[k] * np.exp(-d2 / (2.0 * sigma[k] ** 2))

    return GrayImage(np.clip(img, 0.0, 1.0))


@dataclass(frozen=True)
class WarpSpec:
    """Specification of an analytic deformation map phi.

    kinds and parameters:
      translation:          shift=(tx, ty) px
      rotation:             angle_deg about the image center
      homogeneous:          gradient=2x2 matrix A, about the image center
      barreled_compression: eps_ax (axial log strain, in (-1, 0]),
                            beta (barrel amplitude >= 0), axis ('x'|'y'),
                            roi=(x0, y0, x1, y1) or None for full image
    """

    kind: str
    shift: tuple[float, float] = (0.0, 0.0)
    angle_deg: float = 0.0
    gradient: tuple = ((1.0, 0.0), (0.0, 1.0))
    eps_ax: float = 0.0
    beta: float = 0.0
    axis: str = "y"
    roi: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        if self.kind not in ("translation", "rotation", "homogeneous", "barreled_compression"):
            raise ValueError(f"unknown warp kind '{self.kind}'")
        if self.kind == "homogeneous":
            A = np.asarray(self.gradient, dtype=np.float64)
            if A.shape != (2, 2) or np.linalg.det(A) <= 0:
                raise ValueError("homogeneous gradient must be 2x2 with positive determinant")
        if self.kind == "barreled_compression":
            if not (-1.0 < self.eps_ax <= 0.0):
                raise ValueError(f"eps_ax must be in (-1, 0], got {self.eps_ax}")
            if self.beta < 0.0:
                raise ValueError(f"beta must be >= 0, got {self.beta}")
            if self.axis not in ("x", "y"):
                raise ValueError(f"axis must be 'x' or 'y', got '{self.axis}'")


class WarpField:
    """Closed-form displacement and gradient of a warp, for oracle use."""

    def __init__(self, spec: WarpSpec, width: int, height: int):
        self.spec = spec
        self.width = width
        self.height = height
        cx, cy = (width - 1) / 2.0, (height - 1) / 2.0
        if spec.kind == "barreled_compression":
            x0, y0, x1, y1 = spec.roi if spec.roi else (0.0, 0.0, width - 1.0, height - 1.0)
            cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
            self.axial_length = (y1 - y0) if spec.axis == "y" else (x1 - x0)
        self.center = (cx, cy)

    def map(self, X: np.ndarray, Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """phi(X): deformed position of reference point (X, Y)."""
        ux, uy = self.displacement(X, Y)
        return X + ux, Y + uy

    def displacement(self, X, Y) -> tuple[np.ndarray, np.ndarray]:
        """u(X) = phi(X) - X."""
        X = np.asarray(X, dtype=np.float64)
        Y = np.asarray(Y, dtype=np.float64)
        s = self.spec
        cx, cy = self.center
        if s.kind == "translation":
            return np.broadcast_to(s.shift[0], X.shape).copy(), np.broadcast_to(
                s.shift[1], Y.shape
            ).copy()
        if s.kind == "rotation":
            th = np.deg2rad(s.angle_deg)
            dx, dy = X - cx, Y - cy
            return (
                np.cos(th) * dx - np.sin(th) * dy - dx,
                np.sin(th) * dx + np.cos(th) * dy - dy,
            )
        if s.kind == "homogeneous":
            A = np.asarray(s.gradient)
            dx, dy = X - cx, Y - cy
            return (A[0, 0] - 1) * dx + A[0, 1] * dy, A[1, 0] * dx + (A[1, 1] - 1) * dy
        # barreled_compression
        eps_eff = np.expm1(s.eps_ax)
        if s.axis == "y":
            ax, tr, c_ax, c_tr = Y - cy, X - cx, cy, cx
        else:
            ax, tr, c_ax, c_tr = X - cx, Y - cy, cx, cy
        u_ax = eps_eff * ax
        u_tr = (-eps_eff / 2.0) * (1.0 + s.beta * np.cos(np.pi * ax / self.axial_length)) * tr
        if s.axis == "y":
            return u_tr, u_ax
        return u_ax, u_tr

    def deformation_gradient(self, X, Y) -> np.ndarray:
        """dphi/dX at reference points, shape X.shape + (2, 2)."""
        X = np.asarray(X, dtype=np.float64)
        Y = np.asarray(Y, dtype=np.float64)
        s = self.spec
        F = np.zeros(X.shape + (2, 2))
        if s.kind == "translation":
            F[..., 0, 0] = F[..., 1, 1] = 1.0
            return F
        if s.kind == "rotation":
            th = np.deg2rad(s.angle_deg)
            F[..., 0, 0] = F[..., 1, 1] = np.cos(th)
            F[..., 0, 1] = -np.sin(th)
            F[..., 1, 0] = np.sin(th)
            return F
        if s.kind == "homogeneous":
            F[...] = np.asarray(s.gradient)
            return F
        eps_eff = np.expm1(s.eps_ax)
        cx, cy = self.center
        L = self.axial_length
        if s.axis == "y":
            ax, tr = Y - cy, X - cx
        else:
            ax, tr = X - cx, Y - cy
        phase = np.pi * ax / L
        f_tt = 1.0 - (eps_eff / 2.0) * (1.0 + s.beta * np.cos(phase))
        f_ta = (eps_eff * s.beta * np.pi / (2.0 * L)) * np.sin(phase) * tr
        f_aa = 1.0 + eps_eff
        if s.axis == "y":
            F[..., 0, 0] = f_tt  # d u_x / d X
            F[..., 0, 1] = f_ta  # d u_x / d Y
            F[..., 1, 1] = f_aa
        else:
            F[..., 1, 1] = f_tt
            F[..., 1, 0] = f_ta
            F[..., 0, 0] = f_aa
        return F

    def log_strain_field(self, X, Y) -> np.ndarray:
        """Ground-truth logarithmic strain tensors at reference points."""
        return log_strain(self.deformation_gradient(X, Y))

    def inverse_map(self, x: np.ndarray, y: np.ndarray, tol: float = 1e-10, max_iter: int = 50):
        """Reference position X with phi(X) = x, by damped fixed-point iteration."""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        X, Y = x.copy(), y.copy()
        omega = 1.0
        last = np.inf
        for _ in range(max_iter):
            ux, uy = self.displacement(X, Y)
            rx, ry = x - ux - X, y - uy - Y
            err = max(np.abs(rx).max(initial=0.0), np.abs(ry).max(initial=0.0))
            if err < tol:
                break
            if err > last:
                omega *= 0.5  # damp if the iteration overshoots
            last = err
            X += omega * rx
            Y += omega * ry
        return X, Y


def warp_image(
    img: GrayImage,
    spec: WarpSpec,
    fill: float | None = BACKGROUND,
    strict: bool = False,
) -> tuple[GrayImage, WarpField]:
    """Warp an image through phi by pull-back sampling of the inverse map.

    Output pixel x receives bicubic_sample(img, phi^-1(x)). Pixels whose
    source leaves the cubic-stencil region are set to `fill`; with
    strict=True (or fill=None) such pixels raise OutOfBounds instead.
    Returns the warped image and the WarpField oracle.
    """
    field = WarpField(spec, img.width, img.height)
    ys, xs = np.mgrid[0.0 : img.height, 0.0 : img.width]
    X, Y = field.inverse_map(xs, ys)
    inside = sample_region_mask(img, X, Y)
    if not np.all(inside):
        if strict or fill is None:
            j = np.argmin(inside)
            raise OutOfBounds(X.flat[j], Y.flat[j])
        out = np.full(xs.shape, float(fill))
        out[inside] = bicubic_sample(img, X[inside], Y[inside])
    else:
        out = bicubic_sample(img, X, Y)
    return GrayImage(np.clip(out, 0.0, 1.0)), field


def ground_truth_csv_rows(field: WarpField, xs: np.ndarray, ys: np.ndarray):
    """Rows (x_px, y_px, ux_px, uy_px) for the exact displacement at points."""
    ux, uy = field.displacement(xs, ys)
    return np.column_stack([xs.ravel(), ys.ravel(), ux.ravel(), uy.ravel()])
