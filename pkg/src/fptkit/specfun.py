"""Special functions behind the Volterra kernels.

Everything here accepts scalars or arrays and returns the same shape. The
parabolic cylinder function is evaluated region by region:

* nonnegative integer order: Hermite closed form;
* large ``|z|`` where the asymptotic series reaches double precision;
* order ``<= -1``: adaptive quadrature of the integral representation
  (compiled kernel when available);
* other orders: upward recurrence from two quadrature-backed orders.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special

from . import _backend
from .errors import DomainError, RangeError

SQRT_2PI = math.sqrt(2.0 * math.pi)
ASYMPTOTIC_MIN_Z = 6.0
_ASY_TOL = 5e-16
_EXP_LIMIT = 700.0

AIRY_SERIES_MAX = 1.0
AIRY_SERIES_MIN = -8.0
AIRY_ASYMPTOTIC_MIN = 12.0
_AI0 = 0.355028053887817239260063186004
_AIP0 = -0.258819403792806798405183560189


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _ret(arr, scalar):
    return float(arr) if scalar else arr


def gamma(x: float) -> float:
    """Gamma function, with the reflection formula below one half.

    Raises
    ------
    DomainError
        At the poles ``0, -1, -2, ...``.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"gamma needs a finite argument, got {x}")
    if x <= 0 and x == math.floor(x):
        raise DomainError(f"gamma has a pole at {x}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * math.gamma(1.0 - x))
    return math.gamma(x)


def norm_pdf(z):
    """Standard normal density."""
    arr, scalar = _as_array(z)
    return _ret(np.exp(-0.5 * arr * arr) / SQRT_2PI, scalar)


def norm_cdf(z):
    """Standard normal distribution function."""
    arr, scalar = _as_array(z)
    return _ret(special.ndtr(arr), scalar)


def hermite(n: int, z):
    """Physicists' Hermite polynomial ``H_n(z)`` by the three-term recurrence."""
    if int(n) != n or n < 0:
        raise DomainError(f"hermite needs a nonnegative integer order, got {n}")
    arr, scalar = _as_array(z)
    h_prev = np.ones_like(arr)
    if n == 0:
        return _ret(h_prev, scalar)
    h = 2.0 * arr
    for k in range(1, int(n)):
        h_prev, h = h, 2.0 * arr * h - 2.0 * k * h_prev
    return _ret(h, scalar)


def _is_nonneg_int(p: float) -> bool:
    return p >= 0 and p == math.floor(p)


def _asy_positive(p: float, x: float):
    """Series ``sum_k c_k x**-2k`` in ``D_p(x) ~ x**p e^{-x^2/4} sum``.

    Returns the sum, or ``None`` when the terms stop shrinking before
    double precision is reached.
    """
    total = 1.0
    term = 1.0
    x2 = x * x
    for k in range(1, 200):
        new = term * (-(p - 2 * k + 2) * (p - 2 * k + 1)) / (2 * k * x2)
        if new == 0.0:
            return total
        if abs(new) > abs(term):
            return None
        total += new
        term = new
        if abs(term) <= _ASY_TOL * abs(total):
            return total
    return None


def _asy_negative(p: float, x: float):
    """Series ``S = sum_k (p+1)_{2k} / (k! 2^k x^{2k})`` for ``D_p(-x)``."""
    total = 1.0
    term = 1.0
    x2 = x * x
    for k in range(1, 200):
        new = term * (p + 2 * k - 1) * (p + 2 * k) / (2 * k * x2)
        if new == 0.0:
            return total
        if abs(new) > abs(term):
            return None
        total += new
        term = new
        if abs(term) <= _ASY_TOL * abs(total):
            return total
    return None


def _scaled_asymptotic(p: float, z: float):
    """``e^{-z^2/4} D_p(z)`` from the large-``|z|`` expansions, or ``None``."""
    if z > 0:
        s = _asy_positive(p, z)
        if s is None:
            return None
        return math.exp(p * math.log(z) - 0.5 * z * z) * s
    x = -z
    rg = float(special.rgamma(-p))
    dom = 0.0
    if rg != 0.0:
        s = _asy_negative(p, x)
        if s is None:
            return None
        dom = SQRT_2PI * rg * math.exp(-(p + 1) * math.log(x)) * s
    sub = 0.0
    c = math.cos(math.pi * p)
    if c != 0.0 and abs(c) > 1e-300:
        s_pos = _asy_positive(p, x)
        if s_pos is None:
            return None
        sub = c * math.exp(p * math.log(x) - 0.5 * x * x) * s_pos
    return dom + sub


def _scaled_hermite(n: int, z: np.ndarray) -> np.ndarray:
    return 2.0 ** (-0.5 * n) * np.exp(-0.5 * z * z) * hermite(n, z / math.sqrt(2.0))


def _scaled_recurrence(p: float, z: np.ndarray) -> np.ndarray:
    # q0 in (-2, -1]; lift with D_{v+1} = z D_v - v D_{v-1}
    steps = math.floor(p) + 2
    q0 = p - steps
    lo = _backend.pcf_scaled_quad(q0 - 1.0, z)
    cur = _backend.pcf_scaled_quad(q0, z)
    v = q0
    for _ in range(steps):
        lo, cur = cur, z * cur - v * lo
        v += 1.0
    return cur


def pcf_d_scaled(p: float, z):
    """Scaled parabolic cylinder function ``exp(-z**2/4) * D_p(z)``.

    Parameters
    ----------
    p : float
        Real order.
    z : float or array_like
        Real argument(s).

    Returns
    -------
    float or ndarray
        Decays to zero as ``z -> +inf`` and grows at most like a power of
        ``|z|`` as ``z -> -inf``, so the result never overflows for the
        orders used by the solvers.
    """
    p = float(p)
    if not math.isfinite(p):
        raise DomainError(f"order must be finite, got {p}")
    arr, scalar = _as_array(z)
    if not np.all(np.isfinite(arr)):
        raise DomainError("pcf_d_scaled needs finite arguments")
    flat = arr.ravel()
    if _is_nonneg_int(p):
        out = _scaled_hermite(int(p), flat)
        return _ret(out.reshape(arr.shape), scalar)

    out = np.empty_like(flat)
    todo = np.ones(flat.shape, dtype=bool)
    for i, zi in enumerate(flat):
        if abs(zi) > ASYMPTOTIC_MIN_Z:
            val = _scaled_asymptotic(p, float(zi))
            if val is not None:
                out[i] = val
                todo[i] = False
    if np.any(todo):
        zt = flat[todo]
        out[todo] = _backend.pcf_scaled_quad(p, zt) if p <= -1.0 else _scaled_recurrence(p, zt)
    if not np.all(np.isfinite(out)):
        raise RangeError(f"pcf_d_scaled({p}, .) overflowed")
    return _ret(out.reshape(arr.shape), scalar)


def pcf_d(p: float, z):
    """Parabolic cylinder function ``D_p(z)``.

    Raises
    ------
    RangeError
        When ``z`` is so negative that ``exp(z**2/4)`` overflows; use
        :func:`pcf_d_scaled` there.
    """
    p = float(p)
    arr, scalar = _as_array(z)
    flat = arr.ravel()
    out = np.empty_like(flat)
    for i, zi in enumerate(flat):
        zi = float(zi)
        quarter = 0.25 * zi * zi
        if zi > ASYMPTOTIC_MIN_Z and not _is_nonneg_int(p):
            s = _asy_positive(p, zi)
            if s is not None:
                out[i] = math.exp(p * math.log(zi) - quarter) * s
                continue
        if _is_nonneg_int(p):
            out[i] = 2.0 ** (-0.5 * p) * math.exp(-quarter) * float(hermite(int(p), zi / math.sqrt(2.0)))
            continue
        if quarter > _EXP_LIMIT:
            if zi < 0:
                raise RangeError(f"D_{p}({zi}) overflows; use pcf_d_scaled")
            out[i] = 0.0
            continue
        out[i] = math.exp(quarter) * float(pcf_d_scaled(p, zi))
    return _ret(out.reshape(arr.shape), scalar)


def _airy_series(x: float) -> float:
    f = g = 0.0
    tf = 1.0
    tg = x
    x3 = x * x * x
    k = 0
    while True:
        f += tf
        g += tg
        k += 1
        tf *= x3 / ((3 * k - 1) * (3 * k))
        tg *= x3 / ((3 * k) * (3 * k + 1))
        if abs(tf) + abs(tg) < 1e-18 * (abs(f) + abs(g)) or k > 200:
            break
    return _AI0 * f + _AIP0 * g


def _airy_u(kmax: int):
    u = [1.0]
    for k in range(1, kmax):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k))
    return u


_U = _airy_u(60)


def _airy_asy_positive(x: float, scaled: bool = False) -> float:
    zeta = 2.0 / 3.0 * x ** 1.5
    total = 0.0
    prev = math.inf
    for k, uk in enumerate(_U):
        term = (-1) ** k * uk / zeta ** k
        if abs(term) > prev:
            break
        total += term
        prev = abs(term)
        if prev < 1e-17 * abs(total):
            break
    pref = 1.0 if scaled else math.exp(-zeta)
    return pref / (2.0 * math.sqrt(math.pi) * x ** 0.25) * total


def _airy_asy_negative(x: float) -> float:
    # Ai(-x) for large x > 0
    zeta = 2.0 / 3.0 * x ** 1.5
    p_sum = q_sum = 0.0
    prev = math.inf
    for k, uk in enumerate(_U):
        term = uk / zeta ** k
        if term > prev:
            break
        prev = term
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            p_sum += sign * term
        else:
            q_sum += sign * term
        if term < 1e-17:
            break
    phase = zeta + math.pi / 4.0
    return (math.sin(phase) * p_sum - math.cos(phase) * q_sum) / (math.sqrt(math.pi) * x ** 0.25)


def _airy_laplace(x: float, scaled: bool = False) -> float:
    # Ai(x) = e^{-zeta}/pi * int_0^inf exp(-sqrt(x) t^2) cos(t^3/3) dt
    rx = math.sqrt(x)
    upper = math.sqrt(45.0 / rx)
    val, _ = integrate.quad(
        lambda t: math.exp(-rx * t * t) * math.cos(t ** 3 / 3.0),
        0.0,
        upper,
        epsabs=0.0,
        epsrel=2e-14,
        limit=400,
    )
    pref = 1.0 if scaled else math.exp(-2.0 / 3.0 * x ** 1.5)
    return pref / math.pi * val


def _airy_scalar(x: float) -> float:
    if not math.isfinite(x):
        raise DomainError(f"airy_ai needs a finite argument, got {x}")
    if AIRY_SERIES_MIN <= x <= AIRY_SERIES_MAX:
        return _airy_series(x)
    if x < AIRY_SERIES_MIN:
        return _airy_asy_negative(-x)
    if x < AIRY_ASYMPTOTIC_MIN:
        return _airy_laplace(x)
    return _airy_asy_positive(x)


def airy_ai(x):
    """Airy function ``Ai(x)`` for real ``x``.

    Maclaurin series on ``[-8, 1]``, a non-oscillatory Laplace-type integral
    on ``(1, 12)``, and asymptotic expansions beyond. Relative accuracy is
    close to machine precision for ``x >= 0``.
    """
    arr, scalar = _as_array(x)
    out = np.array([_airy_scalar(float(v)) for v in arr.ravel()]).reshape(arr.shape)
    return _ret(out, scalar)


def _airy_scaled_scalar(x: float) -> float:
    if not x > 0:
        return _airy_scalar(x)
    if x <= AIRY_SERIES_MAX:
        return _airy_series(x) * math.exp(2.0 / 3.0 * x ** 1.5)
    if x < AIRY_ASYMPTOTIC_MIN:
        return _airy_laplace(x, scaled=True)
    return _airy_asy_positive(x, scaled=True)


def airy_ai_scaled(x):
    """``Ai(x) * exp(2/3 x**1.5)`` for ``x > 0`` and plain ``Ai(x)`` otherwise."""
    arr, scalar = _as_array(x)
    out = np.array([_airy_scaled_scalar(float(v)) for v in arr.ravel()]).reshape(arr.shape)
    return _ret(out, scalar)


def bessel_k_quarter(w):
    """Modified Bessel function ``K_{1/4}(w)`` for ``w > 0``.

    Obtained from ``D_{-1/2}(z) = sqrt(z / (2 pi)) K_{1/4}(z**2 / 4)`` with
    ``z = 2 sqrt(w)``.
    """
    arr, scalar = _as_array(w)
    if np.any(~(arr > 0)):
        raise DomainError("bessel_k_quarter needs w > 0")
    z = 2.0 * np.sqrt(arr)
    flat = z.ravel()
    out = np.empty_like(flat)
    for i, zi in enumerate(flat):
        if zi > ASYMPTOTIC_MIN_Z:
            s = _asy_positive(-0.5, float(zi))
            if s is not None:
                # divide the prefactor analytically to avoid underflow noise
                out[i] = math.exp(-0.5 * math.log(zi) - 0.25 * zi * zi) * s / math.sqrt(zi / (2.0 * math.pi))
                continue
        out[i] = float(pcf_d(-0.5, zi)) / math.sqrt(zi / (2.0 * math.pi))
    return _ret(out.reshape(arr.shape), scalar)


__all__ = [
    "gamma",
    "norm_pdf",
    "norm_cdf",
    "hermite",
    "pcf_d",
    "pcf_d_scaled",
    "airy_ai",
    "airy_ai_scaled",
    "bessel_k_quarter",
]
