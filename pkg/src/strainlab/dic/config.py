"""Correlation configuration and result containers."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from ..grids import Grid2D


@dataclass(frozen=True)
class DicConfig:
    """Subset-correlation settings.

    subset_size is the full odd window edge in pixels; step the grid pitch;
    search_radius bounds the integer pre-search; zncc_accept the validity
    threshold on the final correlation coefficient; gn_tol/gn_max_iter the
    Gauss-Newton exit criteria; reference_update_zncc the mean-ZNCC level
    below which a sequence re-anchors its reference frame.
    """

    subset_size: int = 31
    step: int = 10
    search_radius: int = 20
    zncc_accept: float = 0.7
    gn_tol: float = 1e-4
    gn_max_iter: int = 50
    reference_update_zncc: float = 0.9

    def __post_init__(self):
        if self.subset_size < 11 or self.subset_size % 2 == 0:
            raise ValueError(f"subset_size must be odd and >= 11, got {self.subset_size}")
        if self.step < 1:
            raise ValueError(f"step must be >= 1, got {self.step}")
        if not (0.0 < self.zncc_accept < 1.0):
            raise ValueError(f"zncc_accept must be in (0, 1), got {self.zncc_accept}")
        if self.gn_tol <= 0.0:
            raise ValueError(f"gn_tol must be > 0, got {self.gn_tol}")

    @property
    def half(self) -> int:
        return (self.subset_size - 1) // 2

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class DisplacementField:
    """Per-grid-point displacement with correlation quality and validity."""

    grid: Grid2D
    u: np.ndarray  # (ny, nx, 2) displacement in px
    zncc: np.ndarray  # (ny, nx)
    valid: np.ndarray  # (ny, nx) bool
    iterations: np.ndarray  # (ny, nx) int
    warp_params: np.ndarray = field(default=None, repr=False)  # (ny, nx, 6)

    def __post_init__(self):
        shape = (self.grid.ny, self.grid.nx)
        for name in ("zncc", "valid", "iterations"):
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} shape {getattr(self, name).shape} != grid {shape}")
        if self.u.shape != shape + (2,):
            raise ValueError(f"u shape {self.u.shape} != {shape + (2,)}")

    @property
    def valid_fraction(self) -> float:
        return float(np.count_nonzero(self.valid)) / self.valid.size

    @property
    def mean_zncc(self) -> float:
        if not np.any(self.valid):
            return -1.0
        return float(self.zncc[self.valid].mean())

    def csv_rows(self) -> np.ndarray:
        """Rows (x_px, y_px, ux_px, uy_px, zncc, valid)."""
        pts = self.grid.points()
        return np.column_stack(
            [
                pts[..., 0].ravel(),
                pts[..., 1].ravel(),
                self.u[..., 0].ravel(),
                self.u[..., 1].ravel(),
                self.zncc.ravel(),
                self.valid.ravel().astype(float),
            ]
        )

    @classmethod
    def zeros(cls, grid: Grid2D) -> "DisplacementField":
        shape = (grid.ny, grid.nx)
        return cls(
            grid=grid,
            u=np.zeros(shape + (2,)),
            zncc=np.ones(shape),
            valid=np.ones(shape, dtype=bool),
            iterations=np.zeros(shape, dtype=np.int32),
            warp_params=np.zeros(shape + (6,)),
        )


@dataclass
class SequenceReport:
    """Per-frame tracking quality of an incremental correlation run."""

    mean_zncc: list
    valid_fraction: list
    reference_frame: list
    reanchored: list
    first_degraded_frame: int | None = None
    degraded_frames: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mean_zncc": [float(v) for v in self.mean_zncc],
            "valid_fraction": [float(v) for v in self.valid_fraction],
            "reference_frame": list(self.reference_frame),
            "reanchored": list(self.reanchored),
            "first_degraded_frame": self.first_degraded_frame,
            "degraded_frames": list(self.degraded_frames),
        }
