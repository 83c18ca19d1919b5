"""Deformation-gradient kinematics: logarithmic strain and polar decomposition.

The central quantity is H = 1/2 ln(F^T F) = ln U, computed by
eigendecomposition of C = F^T F. Works for 2x2 and 3x3 tensors, scalar or
batched (leading axes broadcast).
"""

from __future__ import annotations

import numpy as np

from .errors import NonPositiveJacobian

# Eigenvalues of C below this are treated as a collapsed configuration.
_EIG_FLOOR = 1e-12


def _as_batch(F: np.ndarray) -> tuple[np.ndarray, tuple]:
    F = np.asarray(F, dtype=np.float64)
    if F.ndim < 2 or F.shape[-1] != F.shape[-2] or F.shape[-1] not in (2, 3):
        raise ValueError(f"expected (..., d, d) with d in (2, 3), got {F.shape}")
    lead = F.shape[:-2]
    return F.reshape((-1,) + F.shape[-2:]), lead


def log_strain(F: np.ndarray) -> np.ndarray:
    """Logarithmic (Hencky) strain H = 1/2 ln(F^T F).

    Rotation-free: log_strain(R @ F) == log_strain(F) for any rotation R.
    Raises NonPositiveJacobian if det F <= 0 anywhere in the batch.
    """
    Fb, lead = _as_batch(F)
    det = np.linalg.det(Fb)
    if np.any(det <= 0):
        raise NonPositiveJacobian(det.min(), "log_strain")
    C = np.einsum("bki,bkj->bij", Fb, Fb)
    lam2, vecs = np.linalg.eigh(C)
    if np.any(lam2 < _EIG_FLOOR):
        raise NonPositiveJacobian(det[np.argmin(lam2.min(axis=-1))], "collapsed stretch")
    logs = 0.5 * np.log(lam2)
    H = np.einsum("bik,bk,bjk->bij", vecs, logs, vecs)
    H = 0.5 * (H + np.swapaxes(H, -1, -2))
    return H.reshape(lead + F.shape[-2:]) if lead else H[0]


def polar_decompose(F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Right polar decomposition F = R @ U.

    R is a proper rotation (det R = +1), U symmetric positive definite.
    """
    Fb, lead = _as_batch(F)
    det = np.linalg.det(Fb)
    if np.any(det <= 0):
        raise NonPositiveJacobian(det.min(), "polar_decompose")
    C = np.einsum("bki,bkj->bij", Fb, Fb)
    lam2, vecs = np.linalg.eigh(C)
    if np.any(lam2 < _EIG_FLOOR):
        raise NonPositiveJacobian(det[np.argmin(lam2.min(axis=-1))], "collapsed stretch")
    lam = np.sqrt(lam2)
    U = np.einsum("bik,bk,bjk->bij", vecs, lam, vecs)
    U = 0.5 * (U + np.swapaxes(U, -1, -2))
    Uinv = np.einsum("bik,bk,bjk->bij", vecs, 1.0 / lam, vecs)
    R = np.einsum("bij,bjk->bik", Fb, Uinv)
    if lead:
        return R.reshape(lead + F.shape[-2:]), U.reshape(lead + F.shape[-2:])
    return R[0], U[0]


def principal_log_strains(H: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Principal values and orientation of a batch of 2x2 strain tensors.

    Returns (e1, e2, angle) with e1 >= e2 and angle the direction of the
    e1 eigenvector in radians, measured from the x-axis.
    """
    H = np.asarray(H, dtype=np.float64)
    exx, eyy, exy = H[..., 0, 0], H[..., 1, 1], H[..., 0, 1]
    mean = 0.5 * (exx + eyy)
    rad = np.sqrt((0.5 * (exx - eyy)) ** 2 + exy**2)
    e1, e2 = mean + rad, mean - rad
    angle = 0.5 * np.arctan2(2.0 * exy, exx - eyy)
    return e1, e2, angle


def rotation_matrix_2d(angle_rad: float) -> np.ndarray:
    c, s = np.cos(angle_rad), np.sin(angle_rad)
    return np.array([[c, -s], [s, c]])
