# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled correlation kernels.

Same algorithm and contract as the pure-NumPy backend in _kernels_py:
bicubic subset sampling (cubic convolution, a = -0.5), integer ZNCC
search, affine inverse-compositional Gauss-Newton on the ZNSSD criterion
with a line-halving guard. Hot loops run without the GIL so grid rows can
be correlated on real threads.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, floor, sqrt

cnp.import_array()

BACKEND_NAME = "compiled"

cdef enum:
    ST_OK = 0
    ST_FLAT_REF = 1
    ST_SINGULAR = 2
    ST_OOB = 3
    ST_FLAT_TARGET = 4
    ST_MAX_ITER = 5
    ST_SEARCH_EMPTY = 6

OK = ST_OK
FLAT_REF = ST_FLAT_REF
SINGULAR_HESSIAN = ST_SINGULAR
OUT_OF_BOUNDS = ST_OOB
FLAT_TARGET = ST_FLAT_TARGET
MAX_ITER = ST_MAX_ITER
SEARCH_EMPTY = ST_SEARCH_EMPTY

cdef double CUBIC_A = -0.5
cdef double EPS_NORM = 1e-10


cdef inline void _weights(double t, double* w) noexcept nogil:
    cdef double a = CUBIC_A
    cdef double t2 = t * t
    cdef double t3 = t2 * t
    w[0] = a * (t3 - 2.0 * t2 + t)
    w[1] = (a + 2.0) * t3 - (a + 3.0) * t2 + 1.0
    w[2] = -(a + 2.0) * t3 + (2.0 * a + 3.0) * t2 - a * t
    w[3] = a * (t2 - t3)


cdef inline void _dweights(double t, double* w) noexcept nogil:
    cdef double a = CUBIC_A
    cdef double t2 = t * t
    w[0] = a * (3.0 * t2 - 4.0 * t + 1.0)
    w[1] = 3.0 * (a + 2.0) * t2 - 2.0 * (a + 3.0) * t
    w[2] = -3.0 * (a + 2.0) * t2 + 2.0 * (2.0 * a + 3.0) * t - a
    w[3] = a * (2.0 * t - 3.0 * t2)


cdef inline int _clampi(int v, int lo, int hi) noexcept nogil:
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


cdef double _sample_value(const double[:, ::1] px, double x, double y) noexcept nogil:
    cdef int w = px.shape[1]
    cdef int h = px.shape[0]
    cdef int ix = <int>floor(x)
    cdef int iy = <int>floor(y)
    cdef double wx[4]
    cdef double wy[4]
    cdef double acc = 0.0, rowacc
    cdef int m, n, rr, cc
    _weights(x - ix, wx)
    _weights(y - iy, wy)
    for m in range(4):
        rr = _clampi(iy - 1 + m, 0, h - 1)
        rowacc = 0.0
        for n in range(4):
            cc = _clampi(ix - 1 + n, 0, w - 1)
            rowacc += wx[n] * px[rr, cc]
        acc += wy[m] * rowacc
    return acc


cdef void _sample_vg(
    const double[:, ::1] px, double x, double y, double* out
) noexcept nogil:
    """Value, d/dx and d/dy of the interpolant in one patch pass."""
    cdef int w = px.shape[1]
    cdef int h = px.shape[0]
    cdef int ix = <int>floor(x)
    cdef int iy = <int>floor(y)
    cdef double wx[4]
    cdef double wy[4]
    cdef double dwx[4]
    cdef double dwy[4]
    cdef double v = 0.0, gx = 0.0, gy = 0.0
    cdef double rv, rgx
    cdef double pix
    cdef int m, n, rr, cc
    _weights(x - ix, wx)
    _weights(y - iy, wy)
    _dweights(x - ix, dwx)
    _dweights(y - iy, dwy)
    for m in range(4):
        rr = _clampi(iy - 1 + m, 0, h - 1)
        rv = 0.0
        rgx = 0.0
        for n in range(4):
            cc = _clampi(ix - 1 + n, 0, w - 1)
            pix = px[rr, cc]
            rv += wx[n] * pix
            rgx += dwx[n] * pix
        v += wy[m] * rv
        gx += wy[m] * rgx
        gy += dwy[m] * rv
    out[0] = v
    out[1] = gx
    out[2] = gy


cdef int _invert6(double* H, double* Hinv) noexcept nogil:
    """Gauss-Jordan inverse of a 6x6 matrix with partial pivoting."""
    cdef double a[6][12]
    cdef int i, j, k, piv
    cdef double best, tmp, f
    for i in range(6):
        for j in range(6):
            a[i][j] = H[6 * i + j]
            a[i][6 + j] = 1.0 if i == j else 0.0
    for k in range(6):
        piv = k
        best = fabs(a[k][k])
        for i in range(k + 1, 6):
            if fabs(a[i][k]) > best:
                best = fabs(a[i][k])
                piv = i
        if best < 1e-300:
            return 1
        if piv != k:
            for j in range(12):
                tmp = a[k][j]
                a[k][j] = a[piv][j]
                a[piv][j] = tmp
        f = a[k][k]
        for j in range(12):
            a[k][j] /= f
        for i in range(6):
            if i != k:
                f = a[i][k]
                if f != 0.0:
                    for j in range(12):
                        a[i][j] -= f * a[k][j]
    for i in range(6):
        for j in range(6):
            Hinv[6 * i + j] = a[i][6 + j]
    return 0


cdef inline void _compose(double* p, double* dp, double* out) noexcept nogil:
    """out = params of M(p) @ inv(M(dp)) for the affine subset warp."""
    cdef double a = 1.0 + dp[1]
    cdef double b = dp[2]
    cdef double c = dp[0]
    cdef double d = dp[4]
    cdef double e = 1.0 + dp[5]
    cdef double f = dp[3]
    cdef double det = a * e - b * d
    # inverse of [[a, b, c], [d, e, f], [0, 0, 1]]
    cdef double ia = e / det
    cdef double ib = -b / det
    cdef double ic = (b * f - c * e) / det
    cdef double id_ = -d / det
    cdef double ie = a / det
    cdef double if_ = (c * d - a * f) / det
    cdef double m00 = 1.0 + p[1]
    cdef double m01 = p[2]
    cdef double m02 = p[0]
    cdef double m10 = p[4]
    cdef double m11 = 1.0 + p[5]
    cdef double m12 = p[3]
    out[1] = m00 * ia + m01 * id_ - 1.0
    out[2] = m00 * ib + m01 * ie
    out[0] = m00 * ic + m01 * if_ + m02
    out[4] = m10 * ia + m11 * id_
    out[5] = m10 * ib + m11 * ie - 1.0
    out[3] = m10 * ic + m11 * if_ + m12


cdef int _evaluate(
    const double[:, ::1] def_px,
    double x0,
    double y0,
    int half,
    double* p,
    double* ft,
    double df,
    int n,
    double* r,
    double* zncc_out,
) noexcept nogil:
    """Sample the warped subset; fill the ZNSSD residual into r."""
    cdef int w = def_px.shape[1]
    cdef int h = def_px.shape[0]
    cdef int jy, jx, k
    cdef double xi, eta, x, y
    cdef double gsum = 0.0
    cdef double gmean, gt, dg2 = 0.0, cross = 0.0, dg, scale
    # g values go into r temporarily
    k = 0
    for jy in range(2 * half + 1):
        eta = jy - half
        for jx in range(2 * half + 1):
            xi = jx - half
            x = x0 + p[0] + (1.0 + p[1]) * xi + p[2] * eta
            y = y0 + p[3] + p[4] * xi + (1.0 + p[5]) * eta
            if x < 1.0 or x > w - 2.0 or y < 1.0 or y > h - 2.0:
                return ST_OOB
            r[k] = _sample_value(def_px, x, y)
            gsum += r[k]
            k += 1
    gmean = gsum / n
    for k in range(n):
        gt = r[k] - gmean
        dg2 += gt * gt
        cross += ft[k] * gt
        r[k] = gt
    dg = sqrt(dg2)
    if dg < EPS_NORM:
        return ST_FLAT_TARGET
    zncc_out[0] = cross / (df * dg)
    scale = df / dg
    for k in range(n):
        r[k] = ft[k] - scale * r[k]
    return ST_OK


def match_point(
    const double[:, ::1] ref_px,
    const double[:, ::1] def_px,
    double x0,
    double y0,
    int half,
    int radius,
    double tol,
    int max_iter,
    double zncc_accept,
    seed=None,
):
    """Correlate one subset. Returns (p[6], zncc, iters, status).

    Same contract as the pure-Python backend: try the seed warp first if
    given, fall back to integer ZNCC search + refinement.
    """
    cdef int size = 2 * half + 1
    cdef int n = size * size
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ft_arr = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] r_arr = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] J_arr = np.empty((n, 6))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p_arr = np.zeros(6)
    cdef double[::1] ft = ft_arr
    cdef double[::1] r = r_arr
    cdef double[:, ::1] J = J_arr
    cdef double Hm[36]
    cdef double Hinv[36]
    cdef double seed_p[6]
    cdef bint have_seed = 0
    cdef int i
    if seed is not None:
        for i in range(6):
            seed_p[i] = seed[i]
        have_seed = 1

    cdef int w = ref_px.shape[1]
    cdef int h = ref_px.shape[0]
    cdef int status = ST_OK
    cdef int search_status = ST_OK
    cdef double df = 0.0
    cdef double pA[6]
    cdef double pB[6]
    cdef double znccA = -1.0, znccB = -1.0
    cdef int itersA = 0, itersB = 0
    cdef int stA = -1, stB = -1
    cdef bint done = 0, use_seed_result = 0
    cdef double u0 = 0.0, v0 = 0.0
    cdef double vg[3]
    cdef double fsum = 0.0
    cdef int jy, jx, k
    cdef double xi, eta, xs, ys

    with nogil:
        # ---- reference subset: values, gradients, Hessian ----
        k = 0
        for jy in range(size):
            eta = jy - half
            for jx in range(size):
                xi = jx - half
                xs = x0 + xi
                ys = y0 + eta
                if xs < 1.0 or xs > w - 2.0 or ys < 1.0 or ys > h - 2.0:
                    status = ST_OOB
                    break
                _sample_vg(ref_px, xs, ys, vg)
                ft[k] = vg[0]
                fsum += vg[0]
                J[k, 0] = vg[1]
                J[k, 1] = vg[1] * xi
                J[k, 2] = vg[1] * eta
                J[k, 3] = vg[2]
                J[k, 4] = vg[2] * xi
                J[k, 5] = vg[2] * eta
                k += 1
            if status != ST_OK:
                break
        if status == ST_OK:
            fsum /= n
            df = 0.0
            for k in range(n):
                ft[k] -= fsum
                df += ft[k] * ft[k]
            df = sqrt(df)
            if df < EPS_NORM:
                status = ST_FLAT_REF
        if status == ST_OK:
            for i in range(36):
                Hm[i] = 0.0
            for k in range(n):
                for jy in range(6):
                    for jx in range(jy, 6):
                        Hm[6 * jy + jx] += J[k, jy] * J[k, jx]
            for jy in range(6):
                for jx in range(jy):
                    Hm[6 * jy + jx] = Hm[6 * jx + jy]
            if _invert6(Hm, Hinv) != 0:
                status = ST_SINGULAR

        if status == ST_OK:
            # ---- seeded attempt ----
            if have_seed:
                stA = _icgn_run(
                    def_px, x0, y0, half, seed_p, &ft[0], df, n, J, Hinv,
                    tol, max_iter, r, &znccA, &itersA, pA,
                )
                if stA == ST_OK and znccA >= zncc_accept:
                    done = 1
                    use_seed_result = 1
            if not done:
                # ---- integer search + refinement ----
                search_status = _integer_search(
                    def_px, ft, df, x0, y0, half, radius, n, &u0, &v0
                )
                if search_status == ST_OK:
                    seed_p[0] = u0
                    seed_p[1] = 0.0
                    seed_p[2] = 0.0
                    seed_p[3] = v0
                    seed_p[4] = 0.0
                    seed_p[5] = 0.0
                    stB = _icgn_run(
                        def_px, x0, y0, half, seed_p, &ft[0], df, n, J, Hinv,
                        tol, max_iter, r, &znccB, &itersB, pB,
                    )
                    # keep the better of the two attempts
                    use_seed_result = stA == ST_OK and (stB != ST_OK or znccA > znccB)
                    done = 1
                elif stA >= 0:
                    use_seed_result = 1
                    done = 1

    if not done:
        if search_status != ST_OK and status == ST_OK:
            return p_arr, -1.0, 0, int(search_status)
        return p_arr, -1.0, 0, int(status)
    if use_seed_result:
        for i in range(6):
            p_arr[i] = pA[i]
        return p_arr, float(znccA), int(itersA), int(stA)
    for i in range(6):
        p_arr[i] = pB[i]
    return p_arr, float(znccB), int(itersB), int(stB)


cdef int _icgn_run(
    const double[:, ::1] def_px,
    double x0,
    double y0,
    int half,
    double* p0,
    double* ft_ptr,
    double df,
    int n,
    double[:, ::1] J,
    double* Hinv,
    double tol,
    int max_iter,
    double[::1] r_mv,
    double* zncc_out,
    int* iters_out,
    double* p_out,
) noexcept nogil:
    cdef double p[6]
    cdef double dp[6]
    cdef double p_try[6]
    cdef double b[6]
    cdef double zncc = -1.0, zncc_try = 0.0, resid, norm_dp
    cdef int st, i, k, it, halvings
    cdef bint accepted
    cdef double* r = &r_mv[0]
    cdef double* ft = ft_ptr
    for i in range(6):
        p[i] = p0[i]
    st = _evaluate(def_px, x0, y0, half, p, ft, df, n, r, &zncc)
    if st != ST_OK:
        zncc_out[0] = -1.0
        iters_out[0] = 0
        for i in range(6):
            p_out[i] = p[i]
        return st
    resid = 2.0 * (1.0 - zncc)
    it = 0
    while it < max_iter:
        for i in range(6):
            b[i] = 0.0
        for k in range(n):
            for i in range(6):
                b[i] += J[k, i] * r[k]
        for i in range(6):
            dp[i] = 0.0
            for k in range(6):
                dp[i] -= Hinv[6 * i + k] * b[k]
        it += 1
        accepted = 0
        for halvings in range(5):
            _compose(p, dp, p_try)
            st = _evaluate(def_px, x0, y0, half, p_try, ft, df, n, r, &zncc_try)
            if st == ST_OK and 2.0 * (1.0 - zncc_try) <= resid + 1e-15:
                accepted = 1
                break
            for i in range(6):
                dp[i] *= 0.5
        if not accepted:
            # stalled: r no longer matches p, restore by re-evaluating
            st = _evaluate(def_px, x0, y0, half, p, ft, df, n, r, &zncc)
            zncc_out[0] = zncc
            iters_out[0] = it
            for i in range(6):
                p_out[i] = p[i]
            return ST_OK
        for i in range(6):
            p[i] = p_try[i]
        zncc = zncc_try
        resid = 2.0 * (1.0 - zncc)
        norm_dp = sqrt(
            dp[0] * dp[0]
            + dp[3] * dp[3]
            + half * half * (dp[1] * dp[1] + dp[2] * dp[2] + dp[4] * dp[4] + dp[5] * dp[5])
        )
        if norm_dp < tol:
            zncc_out[0] = zncc
            iters_out[0] = it
            for i in range(6):
                p_out[i] = p[i]
            return ST_OK
    zncc_out[0] = zncc
    iters_out[0] = it
    for i in range(6):
        p_out[i] = p[i]
    return ST_MAX_ITER


cdef int _integer_search(
    const double[:, ::1] def_px,
    double[::1] ft,
    double df,
    double x0,
    double y0,
    int half,
    int radius,
    int n,
    double* u_out,
    double* v_out,
) noexcept nogil:
    cdef int w = def_px.shape[1]
    cdef int h = def_px.shape[0]
    cdef int xc = <int>floor(x0 + 0.5)
    cdef int yc = <int>floor(y0 + 0.5)
    cdef int dx_lo = -radius if -radius > half - xc else half - xc
    cdef int dx_hi = radius if radius < w - 1 - half - xc else w - 1 - half - xc
    cdef int dy_lo = -radius if -radius > half - yc else half - yc
    cdef int dy_hi = radius if radius < h - 1 - half - yc else h - 1 - half - yc
    if dx_lo > dx_hi or dy_lo > dy_hi:
        return ST_SEARCH_EMPTY

    cdef int dx, dy, jy, jx, k
    cdef double gsum, gsq, cross, gval, var, zncc
    cdef double best = -2.0
    cdef int best_dx = 0, best_dy = 0
    cdef long d2, best_d2 = 0
    cdef bint better
    for dy in range(dy_lo, dy_hi + 1):
        for dx in range(dx_lo, dx_hi + 1):
            gsum = 0.0
            gsq = 0.0
            cross = 0.0
            k = 0
            for jy in range(2 * half + 1):
                for jx in range(2 * half + 1):
                    gval = def_px[yc + dy - half + jy, xc + dx - half + jx]
                    gsum += gval
                    gsq += gval * gval
                    cross += ft[k] * gval
                    k += 1
            var = gsq - gsum * gsum / n
            if var <= 0.0:
                continue
            zncc = cross / (df * sqrt(var))
            d2 = dx * dx + dy * dy
            better = 0
            if zncc > best:
                better = 1
            elif zncc == best:
                if d2 < best_d2:
                    better = 1
                elif d2 == best_d2:
                    if dy < best_dy or (dy == best_dy and dx < best_dx):
                        better = 1
            if better:
                best = zncc
                best_dx = dx
                best_dy = dy
                best_d2 = d2
    if best <= -2.0:
        return ST_SEARCH_EMPTY
    u_out[0] = xc + best_dx - x0
    v_out[0] = yc + best_dy - y0
    return ST_OK
