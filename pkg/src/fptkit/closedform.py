"""Closed-form and semi-analytic first-passage results used as oracles."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import special

from . import specfun
from .errors import AccuracyError, DomainError, PoleError, RangeError
from .grid import FptSolution, TailModel

GS_ORDERS = (8, 10, 12, 14)
ESCALATION_TOL = 1e-2
SQRT_TAIL_LIMIT = 0.1
_EXP_GUARD = 700.0


def reflection_cdf(c: float, t):
    """``P(tau <= t) = 2 Phi(c / sqrt(t))`` for the constant boundary ``c < 0``."""
    if not c < 0:
        raise DomainError(f"reflection formula needs c < 0, got {c}")
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(t > 0, 2.0 * specfun.norm_cdf(c / np.sqrt(np.where(t > 0, t, 1.0))), 0.0)
    return float(out) if out.ndim == 0 else out


def reflection_density(c: float, t):
    """``-c phi(c / sqrt(t)) / t**1.5``, zero at ``t = 0``."""
    if not c < 0:
        raise DomainError(f"reflection formula needs c < 0, got {c}")
    t = np.asarray(t, dtype=float)
    ts = np.where(t > 0, t, 1.0)
    out = np.where(t > 0, -c * specfun.norm_pdf(c / np.sqrt(ts)) / ts ** 1.5, 0.0)
    return float(out) if out.ndim == 0 else out


def bachelier_levy_density(a: float, slope: float, t):
    """Density of the hitting time of ``-a + slope t``.

    ``a / (sqrt(2 pi) t**1.5) exp(-(a - slope t)**2 / (2 t))``
    """
    if not a > 0:
        raise DomainError(f"need a > 0, got {a}")
    t = np.asarray(t, dtype=float)
    ts = np.where(t > 0, t, 1.0)
    out = np.where(t > 0, a / (math.sqrt(2 * math.pi) * ts ** 1.5)
                   * np.exp(-(a - slope * ts) ** 2 / (2 * ts)), 0.0)
    return float(out) if out.ndim == 0 else out


def bachelier_levy_cdf(a: float, slope: float, t):
    """Integrated Bachelier-Levy density (inverse Gaussian distribution)."""
    if not a > 0:
        raise DomainError(f"need a > 0, got {a}")
    t = np.asarray(t, dtype=float)
    ts = np.where(t > 0, t, 1.0)
    rt = np.sqrt(ts)
    term1 = specfun.norm_cdf((-a + slope * ts) / rt)
    term2 = np.exp(2.0 * a * slope + special.log_ndtr((-a - slope * ts) / rt))
    out = np.where(t > 0, term1 + term2, 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LaplaceInversionConfig:
    """Gaver-Stehfest order and the smallest time at which inversion is tried."""

    order: int = 14
    t_min: float = 0.05
    check_order: int = 12

    def __post_init__(self):
        if self.order not in GS_ORDERS or self.check_order not in GS_ORDERS:
            raise DomainError(f"Gaver-Stehfest order must be one of {GS_ORDERS}")
        if not self.t_min > 0:
            raise DomainError("t_min must be positive")


@lru_cache(maxsize=None)
def stehfest_coefficients(n: int) -> tuple[float, ...]:
    """Exact Stehfest weights ``V_1..V_n`` rounded to double."""
    if n % 2:
        raise DomainError("Stehfest order must be even")
    half = n // 2
    out = []
    for k in range(1, n + 1):
        acc = Fraction(0)
        for j in range((k + 1) // 2, min(k, half) + 1):
            acc += Fraction(j ** half * math.factorial(2 * j),
                            math.factorial(half - j) * math.factorial(j) * math.factorial(j - 1)
                            * math.factorial(k - j) * math.factorial(2 * j - k))
        out.append(float((-1) ** (k + half) * acc))
    return tuple(out)


def gaver_stehfest(transform, t: float, order: int) -> float:
    """Invert a Laplace transform at ``t`` from real samples ``transform(k ln2 / t)``."""
    ln2t = math.log(2.0) / t
    v = stehfest_coefficients(order)
    return ln2t * sum(vk * transform((k + 1) * ln2t) for k, vk in enumerate(v))


def _airy_scale(p: float) -> float:
    return 2.0 ** (1.0 / 3.0) / abs(p) ** (2.0 / 3.0)


def quadratic_laplace(sigma: float, p: float, q: float) -> float:
    """Airy ratio ``Ai(k (sigma - p q)) / Ai(k sigma)`` with ``k = 2**(1/3) |p|**(-2/3)``.

    For the boundary ``p t**2 / 2 - q`` this is the candidate Laplace transform
    of ``exp(p**2 t**3 / 6) f(t)``.

    Raises
    ------
    PoleError
        When the denominator is within 1e-12 of an Airy zero.
    """
    if p == 0 or not q > 0:
        raise DomainError("need p != 0 and q > 0")
    k = _airy_scale(p)
    x_den, x_num = k * sigma, k * (sigma - p * q)
    den = specfun.airy_ai_scaled(x_den)
    if x_den <= 0 and abs(den) < 1e-12:
        raise PoleError(f"sigma={sigma} is at a pole of the Airy ratio")
    num = specfun.airy_ai_scaled(x_num)
    # undo the exponential scaling of arguments that are positive
    log_fac = (_zeta(x_den) - _zeta(x_num))
    return num / den * math.exp(log_fac)


def _zeta(x: float) -> float:
    return 2.0 / 3.0 * x ** 1.5 if x > 0 else 0.0


def quadratic_density(t: float, p: float, q: float,
                      cfg: LaplaceInversionConfig | None = None) -> float:
    """Density for the boundary ``p t**2/2 - q`` by Gaver-Stehfest inversion.

    ``f(t) = exp(-p**2 t**3 / 6) * GS[psi](t)``, with ``psi`` from
    :func:`quadratic_laplace`.

    Raises
    ------
    AccuracyError
        If the configured order and the check order disagree by more than 1e-2
        relative.
    """
    cfg = cfg or LaplaceInversionConfig()
    if t < cfg.t_min:
        raise DomainError(f"t={t} below t_min={cfg.t_min}")
    expo = p * p * t ** 3 / 6.0
    if expo > _EXP_GUARD:
        raise RangeError("p**2 t**3 / 6 too large for double precision")

    def psi(s):
        return quadratic_laplace(s, p, q)

    scale = math.exp(-expo)
    main = scale * gaver_stehfest(psi, t, cfg.order)
    check = scale * gaver_stehfest(psi, t, cfg.check_order)
    ref = max(abs(main), 1e-300)
    if abs(main - check) > ESCALATION_TOL * ref and abs(main - check) > 1e-12:
        raise AccuracyError(
            f"Gaver-Stehfest orders {cfg.check_order} and {cfg.order} disagree at t={t}: "
            f"{check:.6g} vs {main:.6g}")
    return main


@dataclass(frozen=True)
class MellinCheck:
    """Both sides of the Mellin identity for the square-root boundary."""

    lhs: float
    rhs: float
    tail: float
    tail_mass: float

    @property
    def value(self) -> float:
        return self.lhs - self.rhs

    @property
    def relative(self) -> float:
        return abs(self.value) / abs(self.rhs)


def sqrt_mellin_rhs(x: float, p_param: float, q: float) -> float:
    """``exp(-p**2/4) q**-x / D_{-x}(p)``."""
    return math.exp(-p_param ** 2 / 4.0) * q ** (-x) / specfun.pcf_d(-x, p_param)


def sqrt_mellin_check(x: float, p_param: float, q: float, sol: FptSolution,
                      tail_limit: float = SQRT_TAIL_LIMIT) -> MellinCheck:
    """Compare ``int_0^inf t**(-x/2) f(t) dt`` with its closed form.

    The integral is the trapezoid rule on ``sol`` plus a fitted tail beyond
    the horizon (see :class:`fptkit.grid.TailModel`).

    Raises
    ------
    RangeError
        When the unresolved mass ``1 - F(T)`` exceeds ``tail_limit``.
    """
    if not x < 1:
        raise DomainError(f"need x < 1, got {x}")
    if p_param == 0 or not q > 0:
        raise DomainError("need p != 0 and q > 0")
    mass = 1.0 - float(sol.cdf[-1])
    if mass > tail_limit:
        raise RangeError(f"horizon too short: tail mass {mass:.3g} exceeds {tail_limit}")
    t = sol.t
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(t > 0, t ** (-x / 2.0) * sol.density, 0.0)
    body = float(np.sum(0.5 * (g[1:] + g[:-1]) * np.diff(t)))
    tail = TailModel.fit(sol).integrate(lambda s: s ** (-x / 2.0))
    return MellinCheck(body + tail, sqrt_mellin_rhs(x, p_param, q), tail, mass)


__all__ = ["reflection_cdf", "reflection_density", "bachelier_levy_density", "bachelier_levy_cdf",
           "LaplaceInversionConfig", "stehfest_coefficients", "gaver_stehfest",
           "quadratic_laplace", "quadratic_density", "MellinCheck", "sqrt_mellin_rhs",
           "sqrt_mellin_check"]
