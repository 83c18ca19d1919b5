"""Pure-NumPy correlation kernels.

Fallback backend with the same contract as the compiled extension in
``_icgn.pyx``: subset matching by integer ZNCC search plus affine
inverse-compositional Gauss-Newton refinement of the ZNSSD criterion.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..images import cubic_weights, cubic_weights_deriv

BACKEND_NAME = "python"

# Status codes shared with the compiled backend.
OK = 0
FLAT_REF = 1
SINGULAR_HESSIAN = 2
OUT_OF_BOUNDS = 3
FLAT_TARGET = 4
MAX_ITER = 5
SEARCH_EMPTY = 6

_EPS_NORM = 1e-10


def _sample(px, x, y, dx=False, dy=False):
    h, w = px.shape
    ix = np.floor(x).astype(np.intp)
    iy = np.floor(y).astype(np.intp)
    wx = (cubic_weights_deriv if dx else cubic_weights)(x - ix)
    wy = (cubic_weights_deriv if dy else cubic_weights)(y - iy)
    cols = np.clip(ix[:, None] + np.arange(-1, 3), 0, w - 1)
    rows = np.clip(iy[:, None] + np.arange(-1, 3), 0, h - 1)
    patch = px[rows[:, :, None], cols[:, None, :]]
    return np.einsum("kij,ki,kj->k", patch, wy, wx)


def _inside(px, x, y):
    h, w = px.shape
    return bool(
        (x >= 1.0).all() and (x <= w - 2.0).all() and (y >= 1.0).all() and (y <= h - 2.0).all()
    )


def _warp_matrix(p):
    return np.array(
        [[1.0 + p[1], p[2], p[0]], [p[4], 1.0 + p[5], p[3]], [0.0, 0.0, 1.0]]
    )


def _matrix_params(M):
    return np.array([M[0, 2], M[0, 0] - 1.0, M[0, 1], M[1, 2], M[1, 0], M[1, 1] - 1.0])


def _integer_search(def_px, ft, x0, y0, half, radius):
    """Best integer displacement by ZNCC. Returns (u, v, zncc) or None."""
    h, w = def_px.shape
    n = ft.size
    xc, yc = int(round(x0)), int(round(y0))
    dx_lo = max(-radius, half - xc)
    dx_hi = min(radius, w - 1 - half - xc)
    dy_lo = max(-radius, half - yc)
    dy_hi = min(radius, h - 1 - half - yc)
    if dx_lo > dx_hi or dy_lo > dy_hi:
        return None

    big = def_px[
        yc + dy_lo - half : yc + dy_hi + half + 1,
        xc + dx_lo - half : xc + dx_hi + half + 1,
    ]
    size = 2 * half + 1
    win = sliding_window_view(big, (size, size))
    ft2 = ft.reshape(size, size)
    cross = np.einsum("yxij,ij->yx", win, ft2)
    sums = np.einsum("yxij->yx", win)
    sumsq = np.einsum("yxij,yxij->yx", win, win)
    var = sumsq - sums * sums / n
    df = np.sqrt((ft * ft).sum())
    with np.errstate(invalid="ignore", divide="ignore"):
        zncc = cross / (df * np.sqrt(np.maximum(var, 0.0)))
    zncc[var <= 0] = -np.inf

    dys, dxs = np.meshgrid(
        np.arange(dy_lo, dy_hi + 1), np.arange(dx_lo, dx_hi + 1), indexing="ij"
    )
    d2 = dxs * dxs + dys * dys
    # Deterministic tie-break: highest zncc, then smallest |d|^2, dy, dx.
    order = np.lexsort((dxs.ravel(), dys.ravel(), d2.ravel(), -zncc.ravel()))
    best = order[0]
    if not np.isfinite(zncc.ravel()[best]):
        return None
    u = xc + dxs.ravel()[best] - x0
    v = yc + dys.ravel()[best] - y0
    return float(u), float(v), float(zncc.ravel()[best])


class _RefSubset:
    """Per-point reference data reused across refinement attempts."""

    def __init__(self, ref_px, x0, y0, half):
        size = 2 * half + 1
        eta, xi = np.mgrid[-half : half + 1, -half : half + 1]
        self.xi = xi.ravel().astype(np.float64)
        self.eta = eta.ravel().astype(np.float64)
        self.x0, self.y0, self.half = x0, y0, half
        xs = x0 + self.xi
        ys = y0 + self.eta
        self.status = OK
        if not _inside(ref_px, xs, ys):
            self.status = OUT_OF_BOUNDS
            return
        f = _sample(ref_px, xs, ys)
        fx = _sample(ref_px, xs, ys, dx=True)
        fy = _sample(ref_px, xs, ys, dy=True)
        self.ft = f - f.mean()
        self.df = np.sqrt((self.ft * self.ft).sum())
        if self.df < _EPS_NORM:
            self.status = FLAT_REF
            return
        self.J = np.column_stack(
            [fx, fx * self.xi, fx * self.eta, fy, fy * self.xi, fy * self.eta]
        )
        H = self.J.T @ self.J
        try:
            self.Hinv = np.linalg.inv(H)
        except np.linalg.LinAlgError:
            self.status = SINGULAR_HESSIAN


def _evaluate(ref: _RefSubset, def_px, p):
    """Sample the deformed subset under warp p. Returns (status, zncc, r)."""
    x = ref.x0 + p[0] + (1.0 + p[1]) * ref.xi + p[2] * ref.eta
    y = ref.y0 + p[3] + p[4] * ref.xi + (1.0 + p[5]) * ref.eta
    if not _inside(def_px, x, y):
        return OUT_OF_BOUNDS, -1.0, None
    g = _sample(def_px, x, y)
    gt = g - g.mean()
    dg = np.sqrt((gt * gt).sum())
    if dg < _EPS_NORM:
        return FLAT_TARGET, -1.0, None
    zncc = float((ref.ft @ gt) / (ref.df * dg))
    r = ref.ft - (ref.df / dg) * gt
    return OK, zncc, r


def _icgn(ref: _RefSubset, def_px, p0, tol, max_iter):
    """Gauss-Newton refinement from p0. Returns (p, zncc, iters, status)."""
    p = np.asarray(p0, dtype=np.float64).copy()
    status, zncc, r = _evaluate(ref, def_px, p)
    if status != OK:
        return p, -1.0, 0, status
    resid = 2.0 * (1.0 - zncc)
    half = float(ref.half)
    iters = 0
    while iters < max_iter:
        b = ref.J.T @ r
        dp = -(ref.Hinv @ b)
        iters += 1
        # Line-halving guard: accept only non-increasing ZNSSD residual.
        accepted = False
        for _ in range(5):
            p_try = _matrix_params(_warp_matrix(p) @ np.linalg.inv(_warp_matrix(dp)))
            st, zncc_try, r_try = _evaluate(ref, def_px, p_try)
            if st == OK and 2.0 * (1.0 - zncc_try) <= resid + 1e-15:
                accepted = True
                break
            dp = dp / 2.0
        if not accepted:
            return p, zncc, iters, OK  # stalled at a local minimum
        p, zncc, r = p_try, zncc_try, r_try
        resid = 2.0 * (1.0 - zncc)
        norm = np.sqrt(
            dp[0] ** 2
            + dp[3] ** 2
            + (half * dp[1]) ** 2
            + (half * dp[2]) ** 2
            + (half * dp[4]) ** 2
            + (half * dp[5]) ** 2
        )
        if norm < tol:
            return p, zncc, iters, OK
    return p, zncc, iters, MAX_ITER


def match_point(
    ref_px: np.ndarray,
    def_px: np.ndarray,
    x0: float,
    y0: float,
    half: int,
    radius: int,
    tol: float,
    max_iter: int,
    zncc_accept: float,
    seed: np.ndarray | None = None,
):
    """Correlate one subset. Returns (p[6], zncc, iters, status).

    Tries the seed warp first when given; falls back to an integer ZNCC
    search when the seeded refinement is rejected.
    """
    ref = _RefSubset(ref_px, x0, y0, half)
    if ref.status != OK:
        return np.zeros(6), -1.0, 0, ref.status

    best = None
    if seed is not None:
        res = _icgn(ref, def_px, seed, tol, max_iter)
        if res[3] == OK and res[1] >= zncc_accept:
            return res
        best = res

    found = _integer_search(def_px, ref.ft, x0, y0, half, radius)
    if found is None:
        if best is not None:
            return best
        return np.zeros(6), -1.0, 0, SEARCH_EMPTY
    u, v, _ = found
    res = _icgn(ref, def_px, np.array([u, 0.0, 0.0, v, 0.0, 0.0]), tol, max_iter)
    if best is not None and best[3] == OK and (res[3] != OK or best[1] > res[1]):
        return best
    return res
