"""Regular 2-D measurement grids."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid2D:
    """Regular grid of measurement points: origin + spacing * (i, j).

    Index i runs along x (nx points), j along y (ny points).
    """

    origin: tuple[float, float]
    spacing: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.spacing <= 0:
            raise ValueError(f"spacing must be > 0, got {self.spacing}")
        if self.nx < 2 or self.ny < 2:
            raise ValueError(f"need nx, ny >= 2, got ({self.nx}, {self.ny})")

    @property
    def n_points(self) -> int:
        return self.nx * self.ny

    def xs(self) -> np.ndarray:
        return self.origin[0] + self.spacing * np.arange(self.nx)

    def ys(self) -> np.ndarray:
        return self.origin[1] + self.spacing * np.arange(self.ny)

    def points(self) -> np.ndarray:
        """All grid points as an (ny, nx, 2) array of (x, y)."""
        x, y = np.meshgrid(self.xs(), self.ys())
        return np.stack([x, y], axis=-1)

    def bounds(self) -> tuple[float, float, float, float]:
        """(x_min, y_min, x_max, y_max) of the grid extent."""
        x0, y0 = self.origin
        return (x0, y0, x0 + self.spacing * (self.nx - 1), y0 + self.spacing * (self.ny - 1))

    def fits_in_image(self, width: int, height: int, margin: float = 0.0) -> bool:
        x0, y0, x1, y1 = self.bounds()
        return (
            x0 - margin >= 0
            and y0 - margin >= 0
            and x1 + margin <= width - 1
            and y1 + margin <= height - 1
        )

    def subrange(self, i0: int, j0: int, ni: int, nj: int) -> "Grid2D":
        """Sub-grid starting at index (i0, j0) with ni x nj points."""
        if i0 < 0 or j0 < 0 or i0 + ni > self.nx or j0 + nj > self.ny:
            raise ValueError("subrange outside grid")
        return Grid2D(
            (self.origin[0] + self.spacing * i0, self.origin[1] + self.spacing * j0),
            self.spacing,
            ni,
            nj,
        )
