"""Subset correlation over grids and frame sequences.

Grid rows are independent work items: the first point of each row is
initialized by integer search, subsequent points seed from their converged
left neighbor. Row results land in preallocated slices, so output is
bit-identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..errors import AllPointsInvalid, GridOutsideImage
from ..grids import Grid2D
from ..images import GrayImage
from .config import DicConfig, DisplacementField, SequenceReport
from . import kernels


def _correlate_rows(
    ref: GrayImage,
    deff: GrayImage,
    centers: np.ndarray,
    cfg: DicConfig,
    jobs: int = 1,
    init: np.ndarray | None = None,
    skip: np.ndarray | None = None,
):
    """Correlate all points of a (ny, nx, 2) center array.

    init, when given, provides a per-point seed warp (ny, nx, 6); points
    where skip is True are left invalid without correlation.
    """
    ny, nx = centers.shape[:2]
    p_out = np.zeros((ny, nx, 6))
    zncc = np.full((ny, nx), -1.0)
    iters = np.zeros((ny, nx), dtype=np.int32)
    valid = np.zeros((ny, nx), dtype=bool)
    ref_px = ref.pixels
    def_px = deff.pixels
    half = cfg.half

    def run_row(j: int):
        left_seed = None
        for i in range(nx):
            if skip is not None and skip[j, i]:
                left_seed = None
                continue
            seed = None
            if init is not None and np.all(np.isfinite(init[j, i])):
                seed = init[j, i]
            if left_seed is not None:
                seed = left_seed if seed is None else seed
            p, rho, it, status = kernels.match_point(
                ref_px,
                def_px,
                float(centers[j, i, 0]),
                float(centers[j, i, 1]),
                half,
                cfg.search_radius,
                cfg.gn_tol,
                cfg.gn_max_iter,
                cfg.zncc_accept,
                seed,
            )
            ok = status == kernels.OK and rho >= cfg.zncc_accept
            p_out[j, i] = p
            zncc[j, i] = rho
            iters[j, i] = it
            valid[j, i] = ok
            left_seed = p.copy() if ok else None

    if jobs <= 1:
        for j in range(ny):
            run_row(j)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(run_row, range(ny)))

    return p_out, zncc, iters, valid


def correlate_pair(
    ref: GrayImage,
    deff: GrayImage,
    grid: Grid2D,
    cfg: DicConfig | None = None,
    jobs: int = 1,
) -> DisplacementField:
    """Displacement field between a reference and a deformed image.

    Integer ZNCC search then subpixel inverse-compositional Gauss-Newton
    per grid point; points below the acceptance threshold are invalid.
    Raises GridOutsideImage if any subset leaves the reference image and
    AllPointsInvalid when nothing correlates.
    """
    cfg = cfg or DicConfig()
    if ref.width != deff.width or ref.height != deff.height:
        raise ValueError("reference and deformed images must have the same size")
    if not grid.fits_in_image(ref.width, ref.height, margin=cfg.half + 1):
        raise GridOutsideImage(
            f"grid {grid.bounds()} with subset {cfg.subset_size} exceeds "
            f"{ref.width}x{ref.height} image"
        )
    centers = grid.points()
    p, zncc, iters, valid = _correlate_rows(ref, deff, centers, cfg, jobs)
    if not valid.any():
        raise AllPointsInvalid("no grid point reached the acceptance threshold")
    return DisplacementField(
        grid=grid,
        u=p[..., [0, 3]].copy(),
        zncc=zncc,
        valid=valid,
        iterations=iters,
        warp_params=p,
    )


def correlate_sequence(
    frames: list[GrayImage],
    grid: Grid2D,
    cfg: DicConfig | None = None,
    jobs: int = 1,
) -> tuple[list[DisplacementField], SequenceReport]:
    """Cumulative displacement of every frame relative to frame 0.

    When a frame's mean ZNCC against the current reference drops below
    cfg.reference_update_zncc, the reference is re-anchored to the
    previous frame and displacements are chained through the accumulated
    motion (incremental referencing). Points whose chain breaks stay
    invalid; they are never interpolated. The report records per-frame
    quality and the first degraded frame.
    """
    cfg = cfg or DicConfig()
    if len(frames) < 2:
        raise ValueError("need at least 2 frames")
    shape = (frames[0].width, frames[0].height)
    for k, f in enumerate(frames):
        if (f.width, f.height) != shape:
            raise ValueError(f"frame {k} size differs from frame 0")
    if not grid.fits_in_image(shape[0], shape[1], margin=cfg.half + 1):
        raise GridOutsideImage("grid subsets exceed the frame size")

    base = grid.points()
    fields = [DisplacementField.zeros(grid)]
    report = SequenceReport(
        mean_zncc=[1.0], valid_fraction=[1.0], reference_frame=[0], reanchored=[False]
    )
    ref_idx = 0
    u_ref = np.zeros_like(base)  # cumulative displacement at the reference frame
    alive = np.ones(base.shape[:2], dtype=bool)

    def run(k: int, centers, init, skip):
        return _correlate_rows(frames[ref_idx], frames[k], centers, cfg, jobs, init, skip)

    for k in range(1, len(frames)):
        centers = base + u_ref
        margin = cfg.half + 1
        reachable = (
            (centers[..., 0] >= margin)
            & (centers[..., 0] <= shape[0] - 1 - margin)
            & (centers[..., 1] >= margin)
            & (centers[..., 1] <= shape[1] - 1 - margin)
        )
        skip = ~(alive & reachable)
        init = np.zeros(base.shape[:2] + (6,))
        init[..., 0] = fields[k - 1].u[..., 0] - u_ref[..., 0]
        init[..., 3] = fields[k - 1].u[..., 1] - u_ref[..., 1]
        init[~fields[k - 1].valid] = np.nan  # no seed, force integer search

        reanchored = False
        p, zncc, iters, valid = run(k, centers, init, skip)
        attempted = ~skip
        mean_zncc = float(zncc[attempted].mean()) if attempted.any() else -1.0
        if mean_zncc < cfg.reference_update_zncc and ref_idx < k - 1:
            # Re-anchor on the previous frame and chain through it.
            ref_idx = k - 1
            u_ref = fields[k - 1].u.copy()
            alive = fields[k - 1].valid.copy()
            centers = base + u_ref
            reachable = (
                (centers[..., 0] >= margin)
                & (centers[..., 0] <= shape[0] - 1 - margin)
                & (centers[..., 1] >= margin)
                & (centers[..., 1] <= shape[1] - 1 - margin)
            )
            skip = ~(alive & reachable)
            p, zncc, iters, valid = run(k, centers, np.zeros_like(init), skip)
            attempted = ~skip
            mean_zncc = float(zncc[attempted].mean()) if attempted.any() else -1.0
            reanchored = True

        u_k = u_ref + p[..., [0, 3]]
        valid_k = valid & alive
        u_k[~valid_k] = 0.0
        fields.append(
            DisplacementField(
                grid=grid, u=u_k, zncc=zncc, valid=valid_k, iterations=iters, warp_params=p
            )
        )
        frac = float(np.count_nonzero(valid_k)) / valid_k.size
        report.mean_zncc.append(mean_zncc)
        report.valid_fraction.append(frac)
        report.reference_frame.append(ref_idx)
        report.reanchored.append(reanchored)
        if frac < 0.5:
            report.degraded_frames.append(k)
            if report.first_degraded_frame is None:
                report.first_degraded_frame = k
        # alive tracks validity at the reference frame; it changes only on
        # re-anchoring, so a transiently lost point can recover while the
        # reference stays fixed.

    return fields, report
