"""Logarithmic strain fields from measured displacement fields.

Each grid point gets a local least-squares plane fit of (ux, uy) over an
odd window of valid neighbors; the fitted gradient gives F = I + du/dX and
H = 1/2 ln(F^T F). Using the log strain (not the symmetrized small-strain
gradient) makes the field exactly rotation-free.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dic.config import DisplacementField
from .errors import EmptyRoi
from .grids import Grid2D
from .kinematics import log_strain, principal_log_strains

_DET_TOL = 1e-9
_MIN_POINTS = 6  # plane fit of (ux, uy): 6 parameters


@dataclass
class LogStrainField:
    """Per-grid-point 2-D logarithmic strain with principal values."""

    grid: Grid2D
    H: np.ndarray  # (ny, nx, 2, 2)
    valid: np.ndarray  # (ny, nx) bool
    axis: str = "y"  # specimen (axial) direction in image coordinates
    principal: np.ndarray = field(default=None, repr=False)  # (ny, nx, 3): e1, e2, angle
    jacobian_failures: int = 0

    def __post_init__(self):
        if self.principal is None:
            e1, e2, ang = principal_log_strains(self.H)
            self.principal = np.stack([e1, e2, ang], axis=-1)

    @property
    def exx(self) -> np.ndarray:
        return self.H[..., 0, 0]

    @property
    def eyy(self) -> np.ndarray:
        return self.H[..., 1, 1]

    @property
    def exy(self) -> np.ndarray:
        return self.H[..., 0, 1]

    @property
    def axial(self) -> np.ndarray:
        return self.eyy if self.axis == "y" else self.exx

    @property
    def transverse(self) -> np.ndarray:
        return self.exx if self.axis == "y" else self.eyy

    @property
    def valid_fraction(self) -> float:
        return float(np.count_nonzero(self.valid)) / self.valid.size

    def component(self, name: str) -> np.ndarray:
        comp = {
            "exx": self.exx,
            "eyy": self.eyy,
            "exy": self.exy,
            "e1": self.principal[..., 0],
            "e2": self.principal[..., 1],
            "axial": self.axial,
            "transverse": self.transverse,
        }
        if name not in comp:
            raise KeyError(f"unknown strain component '{name}'")
        return comp[name]

    def csv_rows(self) -> np.ndarray:
        """Rows (x, y, exx, eyy, exy, e1, e2, valid)."""
        pts = self.grid.points()
        return np.column_stack(
            [
                pts[..., 0].ravel(),
                pts[..., 1].ravel(),
                self.exx.ravel(),
                self.eyy.ravel(),
                self.exy.ravel(),
                self.principal[..., 0].ravel(),
                self.principal[..., 1].ravel(),
                self.valid.ravel().astype(float),
            ]
        )


def strain_from_displacement(
    dfield: DisplacementField, window: int = 5, axis: str = "y"
) -> LogStrainField:
    """Least-squares strain window over the displacement grid.

    window is the odd edge length in grid points. Points are invalid when
    fewer than 6 valid displacements fall in the window, the fit is
    degenerate (collinear support) or the fitted F has det <= 0; the
    count of Jacobian failures is reported on the field.
    """
    if window < 3 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 3, got {window}")
    grid = dfield.grid
    ny, nx = grid.ny, grid.nx
    hw = window // 2
    sp = grid.spacing

    V = dfield.valid.astype(np.float64)
    UX = np.where(dfield.valid, dfield.u[..., 0], 0.0)
    UY = np.where(dfield.valid, dfield.u[..., 1], 0.0)

    # Accumulate normal equations of the plane fit via shifted slices:
    # basis (1, dx, dy) around each point, valid neighbors only.
    S = np.zeros((ny, nx, 3, 3))
    BX = np.zeros((ny, nx, 3))
    BY = np.zeros((ny, nx, 3))
    cnt = np.zeros((ny, nx))

    def shifted(arr, dj, di):
        out = np.zeros_like(arr)
        js = slice(max(dj, 0), ny + min(dj, 0))
        is_ = slice(max(di, 0), nx + min(di, 0))
        jd = slice(max(-dj, 0), ny + min(-dj, 0))
        id_ = slice(max(-di, 0), nx + min(-di, 0))
        out[jd, id_] = arr[js, is_]
        return out

    for dj in range(-hw, hw + 1):
        for di in range(-hw, hw + 1):
            v = shifted(V, dj, di)
            ux = shifted(UX, dj, di)
            uy = shifted(UY, dj, di)
            dx, dy = di * sp, dj * sp
            basis = (1.0, dx, dy)
            for r in range(3):
                for c in range(r, 3):
                    S[..., r, c] += basis[r] * basis[c] * v
                BX[..., r] += basis[r] * ux
                BY[..., r] += basis[r] * uy
            cnt += v
    S[..., 1, 0] = S[..., 0, 1]
    S[..., 2, 0] = S[..., 0, 2]
    S[..., 2, 1] = S[..., 1, 2]

    det = np.linalg.det(S)
    well_posed = (cnt >= _MIN_POINTS) & (det > _DET_TOL * np.maximum(cnt, 1.0) ** 3 * sp**4)
    Ssafe = np.where(well_posed[..., None, None], S, np.eye(3))
    coef_x = np.linalg.solve(Ssafe, BX[..., None])[..., 0]
    coef_y = np.linalg.solve(Ssafe, BY[..., None])[..., 0]

    F = np.zeros((ny, nx, 2, 2))
    F[..., 0, 0] = 1.0 + coef_x[..., 1]
    F[..., 0, 1] = coef_x[..., 2]
    F[..., 1, 0] = coef_y[..., 1]
    F[..., 1, 1] = 1.0 + coef_y[..., 2]

    detF = F[..., 0, 0] * F[..., 1, 1] - F[..., 0, 1] * F[..., 1, 0]
    jac_ok = detF > 0
    valid = well_posed & jac_ok
    failures = int(np.count_nonzero(well_posed & ~jac_ok))

    H = np.zeros((ny, nx, 2, 2))
    if valid.any():
        H[valid] = log_strain(F[valid])

    return LogStrainField(grid=grid, H=H, valid=valid, axis=axis, jacobian_failures=failures)


@dataclass
class FieldStats:
    """Summary statistics of one strain component over valid points."""

    component: str
    mean: float
    sd: float
    min: float
    max: float
    valid_fraction: float
    n_valid: int

    def to_dict(self) -> dict:
        return {
            "component": self.component,
            "mean": self.mean,
            "sd": self.sd,
            "min": self.min,
            "max": self.max,
            "valid_fraction": self.valid_fraction,
            "n_valid": self.n_valid,
        }


def field_stats(
    f: LogStrainField,
    roi: tuple[int, int, int, int] | None = None,
    components: tuple = ("exx", "eyy", "exy", "e1", "e2"),
) -> dict[str, FieldStats]:
    """Statistics per component over the valid points of an index ROI.

    roi is (i0, j0, ni, nj) in grid indices; None takes the whole grid.
    Raises EmptyRoi when no point falls inside.
    """
    if roi is None:
        sel = np.s_[:, :]
        n_roi = f.grid.n_points
    else:
        i0, j0, ni, nj = roi
        if ni <= 0 or nj <= 0 or i0 < 0 or j0 < 0 or i0 + ni > f.grid.nx or j0 + nj > f.grid.ny:
            raise EmptyRoi(f"roi {roi} does not select any grid point")
        sel = np.s_[j0 : j0 + nj, i0 : i0 + ni]
        n_roi = ni * nj
    valid = f.valid[sel]
    n_valid = int(np.count_nonzero(valid))
    out = {}
    for name in components:
        vals = f.component(name)[sel][valid]
        if n_valid == 0:
            out[name] = FieldStats(name, np.nan, np.nan, np.nan, np.nan, 0.0, 0)
        else:
            out[name] = FieldStats(
                name,
                float(vals.mean()),
                float(vals.std()),
                float(vals.min()),
                float(vals.max()),
                n_valid / n_roi,
                n_valid,
            )
    return out
