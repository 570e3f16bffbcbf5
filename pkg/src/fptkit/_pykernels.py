"""Pure-Python implementations of the hot kernels.

These mirror ``_ckernels.pyx`` operation for operation so both backends
return the same numbers up to floating-point rounding. The compiled module
is preferred when it imports; see :mod:`fptkit._backend`.
"""
import math

import numpy as np

# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (nonnegative half).
XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)

_NODES = np.concatenate([-np.array(XGK[:-1]), np.array(XGK[::-1])])
_WK = np.concatenate([np.array(WGK[:-1]), np.array(WGK[::-1])])
_WG = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes: XGK[1], XGK[3], XGK[5], 0.
_WG[[1, 3, 5]] = WG[:3]
_WG[[13, 11, 9]] = WG[:3]
_WG[7] = WG[3]

HALF_WIDTH = 40.0
MAX_DEPTH = 48
MAX_INTERVALS = 2000
_ROUNDOFF = 50.0 * np.finfo(float).eps


def _log_integrand(x, a, z, shift):
    with np.errstate(divide="ignore"):
        lx = np.where(x > 0.0, np.log(np.where(x > 0.0, x, 1.0)), -np.inf)
    if a == 0.0:
        lx = np.zeros_like(x)
    return np.exp(a * lx - 0.5 * (x + z) ** 2 - shift)


def _gk15(a, z, shift, lo, hi):
    c = 0.5 * (lo + hi)
    r = 0.5 * (hi - lo)
    vals = _log_integrand(c + r * _NODES, a, z, shift)
    k = r * float(np.dot(_WK, vals))
    g = r * float(np.dot(_WG, vals))
    return k, abs(k - g)


def _adaptive(a, z, shift, lo, hi, rel_tol, abs_tol):
    if hi <= lo:
        return 0.0
    total_width = hi - lo
    est, _ = _gk15(a, z, shift, lo, hi)
    stack = [(lo, hi, 0)]
    result = 0.0
    count = 0
    while stack:
        x0, x1, depth = stack.pop()
        k, err = _gk15(a, z, shift, x0, x1)
        count += 1
        tol = max(abs_tol, rel_tol * abs(est)) * (x1 - x0) / total_width
        # the last two guards stop refinement at the roundoff floor
        if err <= tol or depth >= MAX_DEPTH or err <= _ROUNDOFF * abs(k) or count >= MAX_INTERVALS:
            result += k
        else:
            xm = 0.5 * (x0 + x1)
            stack.append((xm, x1, depth + 1))
            stack.append((x0, xm, depth + 1))
    return result


def pcf_scaled_quad(q, z, rel_tol=1e-13, abs_tol=1e-300):
    """``exp(-z**2/4) * D_q(z)`` for ``q <= -1`` by adaptive quadrature.

    Uses ``exp(-z**2/4) D_q(z) = Gamma(-q)**-1 * int_0^inf x**(-q-1)
    exp(-(x+z)**2/2) dx``, split at the integrand's mode.
    """
    z = np.ascontiguousarray(z, dtype=float)
    out = np.empty_like(z)
    a = -q - 1.0
    lg = math.lgamma(-q)
    for idx, zi in enumerate(z.flat):
        xm = 0.5 * (-zi + math.sqrt(zi * zi + 4.0 * a))
        if xm > 0.0:
            shift = (a * math.log(xm) if a > 0.0 else 0.0) - 0.5 * (xm + zi) ** 2
        else:
            xm = 0.0
            shift = -0.5 * zi * zi
        left = _adaptive(a, zi, shift, max(0.0, xm - HALF_WIDTH), xm, rel_tol, abs_tol)
        right = _adaptive(a, zi, shift, xm, xm + HALF_WIDTH, rel_tol, abs_tol)
        out.flat[idx] = math.exp(shift - lg) * (left + right)
    return out


def mc_hits(normals, uniforms, bvals, dts, bridge):
    """First grid index at which each path is declared to have crossed.

    ``normals`` and ``uniforms`` have shape (paths, steps); ``bvals`` holds
    the boundary on the grid (steps + 1 values) and ``dts`` the step sizes.
    Paths that survive the horizon get ``steps + 1``.
    """
    n_paths, n_steps = normals.shape
    w = np.zeros(n_paths)
    hit = np.full(n_paths, n_steps + 1, dtype=np.int64)
    alive = np.ones(n_paths, dtype=bool)
    sq = np.sqrt(dts)
    for k in range(n_steps):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        w_prev = w[idx]
        w_new = w_prev + sq[k] * normals[idx, k]
        gap0 = w_prev - bvals[k]
        gap1 = w_new - bvals[k + 1]
        crossed = gap1 <= 0.0
        if bridge:
            prob = np.exp(-2.0 * gap0 * np.where(crossed, 0.0, gap1) / dts[k])
            crossed |= uniforms[idx, k] < prob
        w[idx] = w_new
        done = idx[crossed]
        hit[done] = k + 1
        alive[done] = False
    return hit
