"""Fredholm-type identities and the drift measure-change relation.

For ``alpha`` in the admissible set of a boundary ``b``,

    int_0^inf exp(-alpha b(s) - alpha**2 s / 2) F(ds) = 1.

Complex ``alpha`` is accepted for superlinear boundaries (any
``|arg alpha| <= pi/2``) and for boundaries bounded below when
``|arg alpha| <= pi/4``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .boundary import Boundary, TransformParams, apply_transform
from .errors import DomainError, RangeError
from .grid import FptSolution, TailModel
from .volterra import solve_first_kind, solve_second_kind

TAIL_POLICIES = ("analytic-fit", "bound-only")
BOUND_ONLY_MAX_TAIL = 1e-2


@dataclass(frozen=True)
class FredholmProbe:
    """Transform argument ``alpha`` plus horizon and tail handling."""

    alpha: complex
    horizon: float | None = None
    tail_policy: str = "bound-only"

    def __post_init__(self):
        a = complex(self.alpha)
        object.__setattr__(self, "alpha", a)
        if not (math.isfinite(a.real) and math.isfinite(a.imag)):
            raise DomainError("alpha must be finite")
        if a.real < 0:
            raise DomainError("alpha needs a nonnegative real part")
        if self.tail_policy not in TAIL_POLICIES:
            raise DomainError(f"tail_policy must be one of {TAIL_POLICIES}")

    @property
    def is_complex(self) -> bool:
        return self.alpha.imag != 0.0

    def check_boundary(self, b: Boundary, t: np.ndarray) -> None:
        a = self.alpha
        if self.is_complex:
            arg = abs(cmath.phase(a))
            if b.in_class_B:
                return
            if b.lower_bound is not None and arg <= math.pi / 4 + 1e-12:
                return
            raise DomainError("complex alpha needs a superlinear boundary, or one bounded "
                              "below with |arg alpha| <= pi/4")
        # real alpha: b(t) + alpha t must not trend down at the end of the grid
        v = b(t) + a.real * t
        tail = t >= 0.75 * t[-1]
        if np.sum(tail) >= 2:
            slope = np.polyfit(t[tail], v[tail], 1)[0]
            if slope < -1e-9:
                raise DomainError(f"alpha={a.real} is not admissible: b(t) + alpha t decreases")


@dataclass(frozen=True)
class FredholmResult:
    """Residual of the identity with the tail contribution and its bound."""

    residual: complex
    integral: complex
    tail: complex
    tail_bound: float
    tail_mass: float

    def __abs__(self) -> float:
        return abs(self.residual)


def _cell_weights(t: np.ndarray, alpha: complex, b: Boundary) -> np.ndarray:
    """Average of ``exp(-alpha b(s) - alpha^2 s/2)`` over each grid cell.

    The time factor is integrated exactly; ``b`` is taken at the midpoint.
    """
    t0, t1 = t[:-1], t[1:]
    h = t1 - t0
    mid = 0.5 * (t0 + t1)
    a2 = alpha * alpha / 2.0
    if a2 == 0:
        time_avg = np.ones_like(h, dtype=complex)
    else:
        x = a2 * h
        # (1 - e^{-x}) / x with a series for small |x|
        small = np.abs(x) < 1e-6
        ratio = np.where(small, 1.0 - x / 2.0 + x * x / 6.0,
                         -np.expm1(-np.where(small, 1.0, x)) / np.where(small, 1.0, x))
        time_avg = np.exp(-a2 * t0) * ratio
    return np.exp(-alpha * b(mid)) * time_avg


def _fitted_tail(model: TailModel, b: Boundary, a: complex, T: float) -> complex:
    """``int_T^inf model(s) exp(-a b(s) - a^2 s/2) ds``.

    The factor ``exp(-i Im(a^2) s / 2)`` is handled as a Fourier weight.
    """
    x, y = a.real, a.imag
    omega = x * y
    decay = (x * x - y * y) / 2.0

    def g(s):
        return float(model(s)) * cmath.exp(-a * float(b(s)) - decay * s)

    if omega == 0.0:
        re, _ = integrate.quad(lambda s: g(s).real, T, np.inf, limit=400)
        im, _ = integrate.quad(lambda s: g(s).imag, T, np.inf, limit=400)
        return complex(re, im)
    parts = {}
    for name, fn in (("re", lambda s: g(s).real), ("im", lambda s: g(s).imag)):
        for w in ("cos", "sin"):
            parts[name, w], _ = integrate.quad(fn, T, np.inf, weight=w, wvar=omega, limlst=200)
    # (g_re + i g_im)(cos - i sin)
    return complex(parts["re", "cos"] + parts["im", "sin"], parts["im", "cos"] - parts["re", "sin"])


def fredholm_residual(b: Boundary, sol: FptSolution, probe: FredholmProbe) -> FredholmResult:
    """``int_0^T exp(-alpha b - alpha^2 s/2) F(ds) + tail - 1``.

    The integral uses the increments of ``sol.cdf`` with the kernel averaged
    over each cell. The reported bound ``exp(-Re(alpha) c - Re(alpha^2) T/2)
    (1 - F(T))`` controls the neglected part when ``b >= c``.

    Raises
    ------
    DomainError
        For an inadmissible ``alpha``.
    RangeError
        When the bound-only policy leaves a tail bound above 1e-2.
    """
    t = sol.t
    if probe.horizon is not None:
        if probe.horizon > sol.grid.horizon * (1 + 1e-12):
            raise RangeError("probe horizon exceeds the solved horizon")
        t = t[t <= probe.horizon * (1 + 1e-12)]
    probe.check_boundary(b, t)
    n = t.size
    dF = np.diff(sol.cdf[:n])
    a = probe.alpha
    integral = complex(np.sum(_cell_weights(t, a, b) * dF))
    T = float(t[-1])
    mass = max(0.0, 1.0 - float(sol.cdf[n - 1]))
    c = b.lower_bound if b.lower_bound is not None else float(np.min(b(t)))
    bound = math.exp(-a.real * c - (a * a).real * T / 2.0) * mass
    tail = 0j
    if probe.tail_policy == "bound-only":
        if bound > BOUND_ONLY_MAX_TAIL:
            raise RangeError(f"horizon too short: tail bound {bound:.3g} with 1 - F(T) = {mass:.3g}")
    elif mass > 0:
        sub = FptSolution(type(sol.grid)(t), sol.density[:n], sol.cdf[:n], sol.meta)
        tail = _fitted_tail(TailModel.fit(sub), b, a, T)
    return FredholmResult(integral + tail - 1.0, integral, tail, bound, mass)


@dataclass(frozen=True)
class DriftCheck:
    """Pointwise residual ``f_alpha(t) - f(t) exp(-alpha b(t) - alpha^2 t/2)``."""

    t: np.ndarray
    residual: np.ndarray

    def sup(self, lo: float = 0.0, hi: float = math.inf) -> float:
        mask = (self.t >= lo - 1e-12) & (self.t <= hi + 1e-12)
        return float(np.max(np.abs(self.residual[mask])))


def _resolve(b: Boundary, sol: FptSolution) -> FptSolution:
    method = sol.meta.get("p", -1)
    if method == "second-kind":
        return solve_second_kind(b, sol.grid)
    return solve_first_kind(int(method), b, sol.grid)


def drift_relation_check(b: Boundary, sol: FptSolution, alpha: float,
                         drifted: FptSolution | None = None) -> DriftCheck:
    """Compare an independent solve for ``b + alpha t`` with the reweighted density.

    Parameters
    ----------
    drifted : FptSolution, optional
        Solution for the drifted boundary. Solved with the same method and
        grid as ``sol`` when omitted.
    """
    alpha = float(alpha)
    if drifted is None:
        drifted = _resolve(apply_transform(b, TransformParams(alpha=alpha)), sol)
    elif not np.array_equal(drifted.t, sol.t):
        raise DomainError("drifted solution must share the grid of the base solution")
    t = sol.t
    weight = np.exp(-alpha * b(t) - alpha * alpha * t / 2.0)
    return DriftCheck(t, drifted.density - sol.density * weight)


__all__ = ["FredholmProbe", "FredholmResult", "fredholm_residual", "DriftCheck",
           "drift_relation_check"]
