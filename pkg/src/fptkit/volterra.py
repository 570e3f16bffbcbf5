"""Volterra integral equations for the first-passage density.

Solvers
-------
``solve_first_kind(-1, ...)``
    Kernel ``Phi((b(t) - b(s)) / sqrt(t - s))`` against ``F(ds)``, solved for
    the increments of ``F`` with the kernel sampled at cell midpoints.
``solve_first_kind(0, ...)``
    Abel-type kernel ``phi(.) / sqrt(t - s)``; product trapezoidal rule with
    exact moments of ``(t - s)**-0.5`` against a piecewise-linear density.
``solve_second_kind``
    The same product weights applied to the second-kind equation, which is
    explicit row by row.

``residual_family`` evaluates any member of the family for a given solution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from . import specfun
from .boundary import Boundary
from .errors import DomainError
from .grid import FptSolution, TimeGrid, finalize_density

PHI0 = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class KernelSpec:
    """Member of the family: order ``p`` and ``mode`` in {"limit", "offset"}."""

    p: float
    mode: str = "limit"

    def __post_init__(self):
        if self.mode not in ("limit", "offset"):
            raise DomainError(f"mode must be 'limit' or 'offset', got {self.mode!r}")
        if not math.isfinite(self.p):
            raise DomainError("p must be finite")
        if self.mode == "limit" and self.p >= 1:
            raise DomainError("limit mode needs p < 1")

    def check_boundary(self, b: Boundary) -> None:
        if self.mode != "limit":
            return
        if -1 < self.p <= 0 and not b.is_differentiable:
            raise DomainError(f"limit mode with p={self.p} needs a differentiable boundary")
        if 0 < self.p < 1 and b.smoothness != "c1":
            raise DomainError(f"limit mode with p={self.p} needs a C1 boundary")


def kernel_value(spec: KernelSpec, b: Boundary, t: float, s: float, y: float) -> float:
    """``exp(-z**2/4) D_p(z) / (t - s)**((p + 1) / 2)`` with ``z = (b(s) - y) / sqrt(t - s)``."""
    if not s < t:
        raise DomainError("kernel needs s < t")
    dt = t - s
    z = (b(s) - y) / math.sqrt(dt)
    return specfun.pcf_d_scaled(spec.p, z) / dt ** ((spec.p + 1) / 2)


def rhs_value(spec: KernelSpec, t: float, y: float) -> float:
    """Left-hand side of the family at ``(t, y)``: the kernel with ``s = 0`` and start level 0."""
    z = -y / math.sqrt(t)
    return specfun.pcf_d_scaled(spec.p, z) / t ** ((spec.p + 1) / 2)


def _check_solvable(b: Boundary) -> None:
    if not math.isfinite(b.b0):
        raise DomainError("solvers need a finite b(0)")
    if not b.b0 < 0:
        raise DomainError(f"solvers need b(0) < 0, got {b.b0}")


def product_weights(t: np.ndarray, i: int, mu: float) -> np.ndarray:
    """Weights ``w_j`` with ``int_0^{t_i} (t_i - s)**-mu g(s) ds ~ sum_j w_j g(t_j)``.

    Exact when ``g`` is piecewise linear on the grid. Needs ``mu < 1``.
    """
    ti = t[i]
    ua = ti - t[:i]
    ub = ti - t[1:i + 1]
    h = t[1:i + 1] - t[:i]
    e1 = 1.0 - mu
    e2 = 2.0 - mu
    A = (ua ** e1 - ub ** e1) / e1
    B = ua * A - (ua ** e2 - ub ** e2) / e2
    w = np.zeros(i + 1)
    w[:i] += A - B / h
    w[1:] += B / h
    return w


def _finish(grid: TimeGrid, dens: np.ndarray, cdf: np.ndarray, b: Boundary, method: str,
            p) -> FptSolution:
    cdf = np.maximum.accumulate(np.clip(cdf, 0.0, None))
    dens, flags = finalize_density(grid.points, dens, cdf)
    meta = {"p": p, "method": method, "boundary": b.fingerprint(), "steps": grid.steps,
            "horizon": grid.horizon}
    sol = FptSolution(grid, dens, cdf, meta, flags)
    meta["accuracy_warning"] = sol.accuracy_warning
    return sol


def _solve_pm1(b: Boundary, grid: TimeGrid) -> FptSolution:
    t = grid.points
    n = grid.steps
    bt = b(t)
    mid = 0.5 * (t[1:] + t[:-1])
    bm = b(mid)
    rhs = specfun.norm_cdf(bt[1:] / np.sqrt(t[1:]))
    # K[i-1, j-1] = Phi((b(t_i) - b(m_j)) / sqrt(t_i - m_j)) for j <= i
    ti = t[1:, None]
    dt = ti - mid[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        z = (bt[1:, None] - bm[None, :]) / np.sqrt(np.where(dt > 0, dt, 1.0))
    K = np.tril(specfun.norm_cdf(z))
    dF = solve_triangular(K, rhs, lower=True, check_finite=False)
    cdf = np.concatenate([[0.0], np.cumsum(dF)])
    h = np.diff(t)
    fmid = dF / h
    dens = np.empty(n + 1)
    dens[0] = 0.0
    # node values from neighbouring cell averages, linear extrapolation at the end
    w_left = h[1:] / (h[1:] + h[:-1])
    dens[1:n] = w_left * fmid[:-1] + (1.0 - w_left) * fmid[1:]
    dens[n] = fmid[-1] + (fmid[-1] - fmid[-2]) * h[-1] / (h[-1] + h[-2])
    return _finish(grid, dens, cdf, b, "first-kind-midpoint", -1)


def _solve_p0(b: Boundary, grid: TimeGrid) -> FptSolution:
    t = grid.points
    n = grid.steps
    bt = b(t)
    f = np.zeros(n + 1)
    for i in range(1, n + 1):
        w = product_weights(t, i, 0.5)
        z = (bt[i] - bt[:i]) / np.sqrt(t[i] - t[:i])
        k = np.exp(-0.5 * z * z) * PHI0
        rhs = PHI0 * math.exp(-0.5 * bt[i] ** 2 / t[i]) / math.sqrt(t[i])
        f[i] = (rhs - np.dot(w[:i] * k, f[:i])) / (w[i] * PHI0)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(t))])
    return _finish(grid, f, cdf, b, "first-kind-product-trapezoid", 0)


def solve_first_kind(p: int, b: Boundary, grid: TimeGrid) -> FptSolution:
    """Solve the ``p = -1`` or ``p = 0`` first-kind equation on ``grid``.

    Parameters
    ----------
    p : {-1, 0}
        Member of the family.
    b : Boundary
        Needs finite ``b(0) < 0``; ``p = 0`` also needs differentiability.
    grid : TimeGrid

    Returns
    -------
    FptSolution
        ``meta["accuracy_warning"]`` is set when the density went clearly
        negative or ``F`` jumped by more than 0.2 in one step.
    """
    _check_solvable(b)
    if p == -1:
        return _solve_pm1(b, grid)
    if p == 0:
        KernelSpec(0.0).check_boundary(b)
        return _solve_p0(b, grid)
    raise DomainError(f"first-kind solves are provided for p in {{-1, 0}}, got {p}")


def solve_second_kind(b: Boundary, grid: TimeGrid, sign: float = -1.0) -> FptSolution:
    """Second-kind equation for the density of a C1 boundary.

    ``f(t) = -b(t) phi(b(t)/sqrt(t)) / t**1.5
    - int_0^t phi((b(t)-b(s))/sqrt(t-s)) (b(s)-b(t)) / (t-s)**1.5 f(s) ds``

    ``sign`` multiplies the free term; it exists so the regression suite can
    show that ``sign=+1`` gives a negative density.
    """
    _check_solvable(b)
    if b.smoothness != "c1":
        raise DomainError("second-kind solver needs a C1 boundary")
    t = grid.points
    n = grid.steps
    bt = b(t)
    dbt = b.derivative(t)
    f = np.zeros(n + 1)
    for i in range(1, n + 1):
        w = product_weights(t, i, 0.5)
        ds = t[i] - t[:i]
        db = bt[:i] - bt[i]
        z = -db / np.sqrt(ds)
        g = PHI0 * np.exp(-0.5 * z * z) * db / ds
        g_diag = -dbt[i] * PHI0
        free = sign * bt[i] * PHI0 * math.exp(-0.5 * bt[i] ** 2 / t[i]) / t[i] ** 1.5
        f[i] = (free - np.dot(w[:i] * g, f[:i])) / (1.0 + w[i] * g_diag)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(t))])
    return _finish(grid, f, cdf, b, "second-kind-product-trapezoid", "second-kind")


@dataclass(frozen=True)
class Residual:
    """Residual ``lhs - integral`` with a scale for relative comparisons."""

    value: float
    lhs: float
    scale: float

    @property
    def relative(self) -> float:
        return abs(self.value) / self.scale if self.scale > 0 else abs(self.value)

    def __float__(self) -> float:
        return float(self.value)


def _prefix(sol: FptSolution, t: float):
    i = sol.grid.index_of(t)
    if i == 0:
        raise DomainError("residuals need t > 0")
    return i, sol.t[:i + 1], sol.density[:i + 1]


def _trapezoid_weights(ts: np.ndarray) -> np.ndarray:
    h = np.diff(ts)
    w = np.zeros(ts.size)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    return w


def residual_family(spec: KernelSpec, b: Boundary, sol: FptSolution, t: float,
                    y: float | None = None) -> Residual:
    """Residual of the order-``p`` equation at ``(t, y)`` for a candidate solution.

    In limit mode ``y = b(t)`` and the ``(t-s)**(-(p+1)/2)`` singularity is
    integrated exactly against a piecewise-linear model of the smooth part.
    In offset mode the kernel vanishes at ``s = t`` and the trapezoid rule
    on grid nodes is used.
    """
    spec.check_boundary(b)
    i, ts, fs = _prefix(sol, t)
    t = float(ts[-1])
    bt = b(t)
    if spec.mode == "limit":
        y = bt
    elif y is None or not y < bt:
        raise DomainError("offset mode needs y < b(t)")
    lhs = rhs_value(spec, t, y)
    ds = t - ts[:-1]
    z = (b(ts[:-1]) - y) / np.sqrt(ds)
    if spec.mode == "limit" and spec.p <= -1:
        # bounded kernel: integrate against F increments, kernel at cell midpoints
        mid = 0.5 * (ts[1:] + ts[:-1])
        dm = t - mid
        zm = (b(mid) - y) / np.sqrt(dm)
        k = specfun.pcf_d_scaled(spec.p, zm) / dm ** ((spec.p + 1) / 2)
        vals = k * np.diff(sol.cdf[:i + 1])
    elif spec.mode == "limit":
        mu = (spec.p + 1.0) / 2.0
        g = np.append(specfun.pcf_d_scaled(spec.p, z), specfun.pcf_d_scaled(spec.p, 0.0))
        w = product_weights(ts, i, mu)
        vals = w * g * fs
    else:
        k = np.append(specfun.pcf_d_scaled(spec.p, z) / ds ** ((spec.p + 1) / 2), 0.0)
        vals = _trapezoid_weights(ts) * k * fs
    integral = float(np.sum(vals))
    return Residual(lhs - integral, lhs, max(abs(lhs), float(np.sum(np.abs(vals)))))


_K_QUARTER_AT_ZERO = math.gamma(0.25) * 8.0 ** 0.25 / 2.0  # lim sqrt(z) K_{1/4}(z^2/4)


def _sqrt_z_k(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    out = np.full(z.shape, _K_QUARTER_AT_ZERO)
    pos = z > 0
    if np.any(pos):
        zp = z[pos]
        out[pos] = np.sqrt(zp) * np.exp(-zp * zp / 4.0) * specfun.bessel_k_quarter(zp * zp / 4.0)
    return out


def residual_case4(b: Boundary, sol: FptSolution, t: float) -> Residual:
    """The ``p = -1/2`` equation written with ``K_{1/4}``.

    ``sqrt(-b/t) e^{-b^2/4t} K(b^2/4t) = int sqrt(db/ds) e^{-db^2/4ds} K(db^2/4ds) F(ds)``
    with ``db = b(s) - b(t) >= 0``. The Bessel form only covers boundaries
    that do not increase, so ``b(s) < b(t)`` raises.
    """
    KernelSpec(-0.5).check_boundary(b)
    i, ts, fs = _prefix(sol, t)
    t = float(ts[-1])
    bt = b(t)
    db = b(ts[:-1]) - bt
    if np.any(db < -1e-12 * max(1.0, abs(bt))):
        raise DomainError("Bessel form needs b(s) >= b(t) for s < t")
    ds = t - ts[:-1]
    z = np.maximum(db, 0.0) / np.sqrt(ds)
    g = np.append(_sqrt_z_k(z), _K_QUARTER_AT_ZERO)
    w = product_weights(ts, i, 0.25)
    vals = w * g * fs
    z0 = -bt / math.sqrt(t)
    lhs = float(_sqrt_z_k(np.array([z0]))[0]) / t ** 0.25
    integral = float(np.sum(vals))
    return Residual(lhs - integral, lhs, max(abs(lhs), float(np.sum(np.abs(vals)))))


def residual_case5(b: Boundary, sol: FptSolution, t: float) -> Residual:
    """``int [s/sqrt(t-s) phi(z) + b(s) Phi(z)] F(ds)`` with ``z = (b(t)-b(s))/sqrt(t-s)``; target 0."""
    KernelSpec(0.0).check_boundary(b)
    i, ts, fs = _prefix(sol, t)
    t = float(ts[-1])
    bt = b(t)
    bs = b(ts)
    ds = t - ts[:-1]
    z = np.append((bt - bs[:-1]) / np.sqrt(ds), 0.0)
    g_sing = ts * specfun.norm_pdf(z)
    g_reg = bs * specfun.norm_cdf(z)
    vals = product_weights(ts, i, 0.5) * g_sing * fs + product_weights(ts, i, 0.0) * g_reg * fs
    integral = float(np.sum(vals))
    return Residual(integral, 0.0, float(np.sum(np.abs(vals))))


def heat_mixture(atoms, s, x):
    """``u(s, x) = sum_i w_i phi((x - theta_i) / sqrt(s)) / sqrt(s)``."""
    s = np.asarray(s, dtype=float)
    x = np.asarray(x, dtype=float)
    out = np.zeros(np.broadcast(s, x).shape)
    rs = np.sqrt(s)
    for theta, weight in atoms:
        out = out + weight * specfun.norm_pdf((x - theta) / rs) / rs
    return out


def _check_atoms(atoms) -> list[tuple[float, float]]:
    atoms = [(float(a), float(w)) for a, w in atoms]
    if not atoms:
        raise DomainError("need at least one atom")
    for theta, weight in atoms:
        if theta < 0 or weight <= 0:
            raise DomainError("atoms need theta >= 0 and positive weight")
    return atoms


def residual_widder(atoms, b: Boundary, sol: FptSolution, t: float, y: float) -> Residual:
    """Residual of ``u(t, y) = int_0^t u(t - s, y - b(s)) F(ds)`` for a Gaussian mixture ``u``."""
    atoms = _check_atoms(atoms)
    i, ts, fs = _prefix(sol, t)
    t = float(ts[-1])
    if not y < b(t):
        raise DomainError("Widder residual needs y < b(t)")
    lhs = float(heat_mixture(atoms, t, y))
    ds = t - ts[:-1]
    k = np.append(heat_mixture(atoms, ds, y - b(ts[:-1])), 0.0)
    vals = _trapezoid_weights(ts) * k * fs
    integral = float(np.sum(vals))
    return Residual(lhs - integral, lhs, max(abs(lhs), float(np.sum(np.abs(vals)))))


__all__ = ["KernelSpec", "Residual", "kernel_value", "rhs_value", "product_weights",
           "solve_first_kind", "solve_second_kind", "residual_family", "residual_case4",
           "residual_case5", "residual_widder", "heat_mixture"]
