# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels in :mod:`fptkit._pykernels`."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, sqrt, lgamma, fabs, INFINITY

cnp.import_array()

cdef double XGK[8]
cdef double WGK[8]
cdef double WG[4]
XGK[:] = [0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
          0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
          0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
          0.207784955007898467600689403773245, 0.0]
WGK[:] = [0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
          0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
          0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
          0.204432940075298892414161999234649, 0.209482141084727828012999174891714]
WG[:] = [0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
         0.381830050505118944950369775488975, 0.417959183673469387755102040816327]

DEF HALF_WIDTH = 40.0
DEF MAX_DEPTH = 48
DEF STACK = 256
DEF MAX_INTERVALS = 2000
DEF ROUNDOFF = 1.1102230246251565e-14


cdef inline double _f(double x, double a, double z, double shift) noexcept nogil:
    cdef double lx
    if a == 0.0:
        lx = 0.0
    elif x > 0.0:
        lx = a * log(x)
    else:
        return 0.0
    return exp(lx - 0.5 * (x + z) * (x + z) - shift)


cdef void _gk15(double a, double z, double shift, double lo, double hi,
                double* k_out, double* err_out) noexcept nogil:
    cdef double c = 0.5 * (lo + hi)
    cdef double r = 0.5 * (hi - lo)
    cdef double fc = _f(c, a, z, shift)
    cdef double k = WGK[7] * fc
    cdef double g = WG[3] * fc
    cdef double f1, f2
    cdef int j
    for j in range(7):
        f1 = _f(c - r * XGK[j], a, z, shift)
        f2 = _f(c + r * XGK[j], a, z, shift)
        k += WGK[j] * (f1 + f2)
        if j % 2 == 1:
            g += WG[j // 2] * (f1 + f2)
    k_out[0] = r * k
    err_out[0] = fabs(r * k - r * g)


cdef double _adaptive(double a, double z, double shift, double lo, double hi,
                      double rel_tol, double abs_tol) noexcept nogil:
    cdef double s0[STACK]
    cdef double s1[STACK]
    cdef int sd[STACK]
    cdef int top = 0
    cdef double est, err, k, tol, x0, x1, xm, width, result = 0.0
    cdef int depth, count = 0
    if hi <= lo:
        return 0.0
    width = hi - lo
    _gk15(a, z, shift, lo, hi, &est, &err)
    s0[0] = lo
    s1[0] = hi
    sd[0] = 0
    top = 1
    while top > 0:
        top -= 1
        x0 = s0[top]
        x1 = s1[top]
        depth = sd[top]
        _gk15(a, z, shift, x0, x1, &k, &err)
        count += 1
        tol = rel_tol * fabs(est)
        if abs_tol > tol:
            tol = abs_tol
        tol = tol * (x1 - x0) / width
        if (err <= tol or depth >= MAX_DEPTH or top + 2 > STACK
                or err <= ROUNDOFF * fabs(k) or count >= MAX_INTERVALS):
            result += k
        else:
            xm = 0.5 * (x0 + x1)
            s0[top] = xm
            s1[top] = x1
            sd[top] = depth + 1
            s0[top + 1] = x0
            s1[top + 1] = xm
            sd[top + 1] = depth + 1
            top += 2
    return result


def pcf_scaled_quad(double q, z, double rel_tol=1e-13, double abs_tol=1e-300):
    """``exp(-z**2/4) * D_q(z)`` for ``q <= -1`` by adaptive quadrature."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] zz = np.ascontiguousarray(z, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(zz)
    cdef double a = -q - 1.0
    cdef double lg = lgamma(-q)
    cdef double zi, xm, shift, left, right, lo
    cdef Py_ssize_t i, n = zz.shape[0]
    with nogil:
        for i in range(n):
            zi = zz[i]
            xm = 0.5 * (-zi + sqrt(zi * zi + 4.0 * a))
            if xm > 0.0:
                shift = (a * log(xm) if a > 0.0 else 0.0) - 0.5 * (xm + zi) * (xm + zi)
            else:
                xm = 0.0
                shift = -0.5 * zi * zi
            lo = xm - HALF_WIDTH
            if lo < 0.0:
                lo = 0.0
            left = _adaptive(a, zi, shift, lo, xm, rel_tol, abs_tol)
            right = _adaptive(a, zi, shift, xm, xm + HALF_WIDTH, rel_tol, abs_tol)
            out[i] = exp(shift - lg) * (left + right)
    return out.reshape(np.shape(z))


def mc_hits(double[:, ::1] normals, double[:, ::1] uniforms, double[::1] bvals,
            double[::1] dts, bint bridge):
    """First grid index at which each path crosses (``steps + 1`` if never)."""
    cdef Py_ssize_t n_paths = normals.shape[0], n_steps = normals.shape[1]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] hit_arr = np.full(n_paths, n_steps + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] hit = hit_arr
    cdef double[::1] sq = np.sqrt(np.asarray(dts))
    cdef Py_ssize_t i, k
    cdef double w, w_new, gap0, gap1
    with nogil:
        for i in range(n_paths):
            w = 0.0
            for k in range(n_steps):
                w_new = w + sq[k] * normals[i, k]
                gap0 = w - bvals[k]
                gap1 = w_new - bvals[k + 1]
                if gap1 <= 0.0:
                    hit[i] = k + 1
                    break
                if bridge and uniforms[i, k] < exp(-2.0 * gap0 * gap1 / dts[k]):
                    hit[i] = k + 1
                    break
                w = w_new
    return hit_arr
