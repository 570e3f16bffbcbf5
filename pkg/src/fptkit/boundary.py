"""Boundaries, builtin families, and the drift/scale/Lerche transforms."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, RangeError
from .grid import FptSolution, TimeGrid, finalize_density

SMOOTHNESS = ("continuous", "differentiable", "c1")


@dataclass(frozen=True)
class Boundary:
    """A continuous boundary ``b(t)`` with regularity metadata.

    Parameters
    ----------
    func : callable
        Vectorised ``t -> b(t)``.
    deriv : callable, optional
        Vectorised ``t -> b'(t)``.
    b0 : float
        Value at ``t = 0``; must be ``<= 0``.
    lower_bound : float, optional
        A constant ``c`` with ``b(t) >= c`` for all ``t``.
    in_class_B : bool
        Whether ``b(t) + u t`` stays above a constant for large ``t`` and
        every ``u < 0`` (superlinear growth).
    smoothness : {"continuous", "differentiable", "c1"}
    spec : dict
        JSON-serialisable description used for fingerprints and the CLI.
    """

    func: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray] | None
    b0: float
    lower_bound: float | None = None
    in_class_B: bool = False
    smoothness: str = "c1"
    spec: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.smoothness not in SMOOTHNESS:
            raise DomainError(f"unknown smoothness {self.smoothness!r}")
        if self.smoothness == "c1" and self.deriv is None:
            raise DomainError("a C1 boundary needs a derivative")
        if self.b0 > 0:
            raise DomainError(f"boundary must start at or below 0, got b(0)={self.b0}")

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = np.asarray(self.func(t_arr), dtype=float)
        out = np.broadcast_to(out, t_arr.shape).copy() if out.shape != t_arr.shape else out
        return float(out) if out.ndim == 0 else out

    def derivative(self, t):
        if self.deriv is None:
            raise DomainError("boundary has no derivative")
        t_arr = np.asarray(t, dtype=float)
        out = np.asarray(self.deriv(t_arr), dtype=float)
        out = np.broadcast_to(out, t_arr.shape).copy() if out.shape != t_arr.shape else out
        return float(out) if out.ndim == 0 else out

    @property
    def is_differentiable(self) -> bool:
        return self.smoothness in ("differentiable", "c1")

    def fingerprint(self) -> str:
        blob = json.dumps(self.spec, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def check_lower_bound(self, t: np.ndarray) -> None:
        if self.lower_bound is not None and np.any(self(t) < self.lower_bound - 1e-12):
            raise DomainError("boundary violates its declared lower bound on the grid")


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise DomainError(msg)


def constant(c: float) -> Boundary:
    _need(c < 0, f"constant boundary needs c < 0, got {c}")
    c = float(c)
    return Boundary(lambda t: np.full(np.shape(t), c), lambda t: np.zeros(np.shape(t)), c,
                    lower_bound=c, smoothness="c1",
                    spec={"kind": "constant", "params": {"c": c}})


def linear(a: float, slope: float) -> Boundary:
    """``b(t) = -a + slope * t``."""
    _need(a > 0, f"linear boundary needs a > 0, got {a}")
    a, slope = float(a), float(slope)
    return Boundary(lambda t: -a + slope * t, lambda t: np.full(np.shape(t), slope), -a,
                    lower_bound=-a if slope >= 0 else None, smoothness="c1",
                    spec={"kind": "linear", "params": {"a": a, "slope": slope}})


def sqrt(p: float, q: float) -> Boundary:
    """``b(t) = p sqrt(t) - q``; derivative blows up at 0, so only differentiable."""
    _need(q > 0, f"sqrt boundary needs q > 0 so that b(0) is finite and negative, got {q}")
    p, q = float(p), float(q)

    def deriv(t):
        with np.errstate(divide="ignore"):
            return 0.5 * p / np.sqrt(t)

    return Boundary(lambda t: p * np.sqrt(t) - q, deriv, -q,
                    lower_bound=-q if p >= 0 else None, smoothness="differentiable",
                    spec={"kind": "sqrt", "params": {"p": p, "q": q}})


def quadratic(p: float, q: float) -> Boundary:
    """``b(t) = p t**2 / 2 - q``; ``p < 0`` gives a downward parabola."""
    _need(q > 0, f"quadratic boundary needs q > 0, got {q}")
    _need(p != 0, "quadratic boundary needs p != 0 (use constant)")
    p, q = float(p), float(q)
    return Boundary(lambda t: 0.5 * p * t * t - q, lambda t: p * t, -q,
                    lower_bound=-q if p > 0 else None, in_class_B=p > 0, smoothness="c1",
                    spec={"kind": "quadratic", "params": {"p": p, "q": q}})


def table(points, smoothness: str = "c1", lower_bound: float | None = None) -> Boundary:
    """Boundary from ``(t, b)`` samples with monotone cubic interpolation."""
    pts = np.asarray(points, dtype=float)
    _need(pts.ndim == 2 and pts.shape[1] == 2 and pts.shape[0] >= 2, "table needs rows of (t, b)")
    _need(pts[0, 0] == 0.0, "table must start at t = 0")
    _need(bool(np.all(np.diff(pts[:, 0]) > 0)), "table times must increase")
    interp = PchipInterpolator(pts[:, 0], pts[:, 1], extrapolate=False)
    dinterp = interp.derivative()
    t_max = float(pts[-1, 0])

    def guard(fn):
        def wrapped(t):
            t = np.asarray(t, dtype=float)
            if np.any(t > t_max * (1 + 1e-12)) or np.any(t < 0):
                raise RangeError(f"table boundary defined on [0, {t_max}] only")
            return fn(np.clip(t, 0.0, t_max))
        return wrapped

    spec = {"kind": "table", "points": pts.tolist(), "smoothness": smoothness}
    if lower_bound is not None:
        spec["lower_bound"] = float(lower_bound)
    b = Boundary(guard(interp), guard(dinterp), float(pts[0, 1]), lower_bound=lower_bound,
                 smoothness=smoothness, spec=spec)
    if lower_bound is not None:
        b.check_lower_bound(pts[:, 0])
    return b


BUILTINS = {"constant": constant, "linear": linear, "sqrt": sqrt, "quadratic": quadratic}
_PARAM_ORDER = {"constant": ("c",), "linear": ("a", "slope"), "sqrt": ("p", "q"), "quadratic": ("p", "q")}


def builtin(kind: str, *params: float) -> Boundary:
    """Builtin family by name with positional parameters."""
    if kind not in BUILTINS:
        raise DomainError(f"unknown boundary kind {kind!r}")
    return BUILTINS[kind](*params)


@dataclass(frozen=True)
class TransformParams:
    """Drift ``alpha``, time scale ``gamma > 0`` and Lerche parameter ``beta >= 0``."""

    alpha: float = 0.0
    gamma: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "gamma", "beta"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not self.gamma > 0:
            raise DomainError(f"gamma must be positive, got {self.gamma}")
        if self.beta < 0:
            raise DomainError(f"beta must be nonnegative, got {self.beta}")

    @property
    def is_identity(self) -> bool:
        return self.alpha == 0.0 and self.gamma == 1.0 and self.beta == 0.0

    def time_map(self, t):
        """``u = gamma t / (1 + beta gamma t)``, the original-time argument."""
        t = np.asarray(t, dtype=float)
        return self.gamma * t / (1.0 + self.beta * self.gamma * t)

    def to_dict(self) -> dict[str, float]:
        return {"alpha": self.alpha, "gamma": self.gamma, "beta": self.beta}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "TransformParams":
        return cls(float(d.get("alpha", 0.0)), float(d.get("gamma", 1.0)), float(d.get("beta", 0.0)))


def apply_transform(b: Boundary, params: TransformParams) -> Boundary:
    """``(T b)(t) = (1 + beta gamma t) / sqrt(gamma) * b(u) + alpha t``.

    ``u = gamma t / (1 + beta gamma t)``. This is the drift, scaling and
    Lerche maps composed with the Lerche map applied first.
    """
    if params.is_identity:
        return b
    al, ga, be = params.alpha, params.gamma, params.beta
    sg = math.sqrt(ga)

    def func(t):
        t = np.asarray(t, dtype=float)
        s = 1.0 + be * ga * t
        return s / sg * b(ga * t / s) + al * t

    deriv = None
    if b.deriv is not None:
        def deriv(t):
            t = np.asarray(t, dtype=float)
            s = 1.0 + be * ga * t
            u = ga * t / s
            return be * sg * b(u) + sg * b.derivative(u) / s + al

    lb = None
    if b.lower_bound is not None and be == 0.0 and al >= 0.0:
        lb = b.lower_bound / sg
    spec = {"kind": "transformed", "base": b.spec, "transform": params.to_dict()}
    return Boundary(func, deriv, b.b0 / sg, lower_bound=lb,
                    in_class_B=b.in_class_B and be == 0.0,
                    smoothness=b.smoothness, spec=spec)


def transform_density(sol: FptSolution, b: Boundary, params: TransformParams,
                      grid: TimeGrid | None = None) -> FptSolution:
    """Density of the first-passage time to ``apply_transform(b, params)``.

    ``f~(t) = gamma f(u) (1 + beta gamma t)**-1.5
    * exp(-(1 + beta gamma t) b(u) (beta b(u) / 2 + alpha / sqrt(gamma)) - alpha**2 t / 2)``

    Parameters
    ----------
    sol : FptSolution
        Solution for ``b``.
    grid : TimeGrid, optional
        Target grid. By default the grid whose end maps to the solved
        horizon (when that is finite), otherwise the original grid.

    Raises
    ------
    RangeError
        If a target time maps beyond the solved horizon.
    """
    if params.is_identity and grid is None:
        return sol
    al, ga, be = params.alpha, params.gamma, params.beta
    T = sol.grid.horizon
    if grid is None:
        if be * T < 1.0:
            t_end = T / (ga * (1.0 - be * T))
            pts = sol.t / sol.grid.horizon * t_end
            grid = TimeGrid(pts)
        else:
            grid = sol.grid
    t = grid.points
    s = 1.0 + be * ga * t
    u = ga * t / s
    if u[-1] > T * (1 + 1e-10):
        raise RangeError(f"target horizon maps to {u[-1]:.6g}, beyond the solved horizon {T:.6g}")
    u = np.minimum(u, T)
    if np.array_equal(u, sol.t):
        fu = sol.density
    else:
        fu = PchipInterpolator(sol.t, sol.density)(u)
    bu = b(u)
    dens = ga * fu * s ** -1.5 * np.exp(-s * bu * (be * bu / 2.0 + al / math.sqrt(ga)) - al * al * t / 2.0)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(t))])
    dens, flags = finalize_density(t, dens, cdf)
    meta = dict(sol.meta)
    meta.update({"method": f"transform({sol.meta.get('method', '?')})", "transform": params.to_dict(),
                 "boundary": apply_transform(b, params).fingerprint()})
    return FptSolution(grid, dens, cdf, meta, flags)


def from_spec(spec: dict[str, Any]) -> Boundary:
    """Build a boundary from its JSON description.

    Accepted forms::

        {"kind": "linear", "params": {"a": 1.0, "slope": 0.5}}
        {"kind": "table", "points": [[t, b], ...], "smoothness": "c1", "lower_bound": -1.0}
        {"kind": "transformed", "base": {...}, "transform": {"alpha": 0.5}}
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise DomainError("boundary spec must be an object with a 'kind'")
    kind = spec["kind"]
    if kind == "table":
        return table(spec["points"], spec.get("smoothness", "c1"), spec.get("lower_bound"))
    if kind == "transformed":
        return apply_transform(from_spec(spec["base"]), TransformParams.from_dict(spec.get("transform", {})))
    if kind not in BUILTINS:
        raise DomainError(f"unknown boundary kind {kind!r}")
    params = spec.get("params", {})
    if isinstance(params, dict):
        names = _PARAM_ORDER[kind]
        missing = [n for n in names if n not in params]
        if missing:
            raise DomainError(f"{kind} boundary missing parameters {missing}")
        return BUILTINS[kind](*(float(params[n]) for n in names))
    return BUILTINS[kind](*map(float, params))


def load_spec(path) -> Boundary:
    with open(path) as fh:
        return from_spec(json.load(fh))


__all__ = ["Boundary", "TransformParams", "constant", "linear", "sqrt", "quadratic", "table",
           "builtin", "apply_transform", "transform_density", "from_spec", "load_spec"]
