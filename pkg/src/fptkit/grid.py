"""Time grids, solution containers and their CSV format."""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np
from scipy import integrate

from .errors import DomainError, RangeError

# bit flags stored per grid point
FLAG_CLIPPED = 1  # tiny negative density set to zero
FLAG_NEGATIVE = 2  # density below the clipping threshold
FLAG_COARSE = 4  # F jumped by more than COARSE_JUMP over the preceding step

NEG_CLIP = 1e-10
COARSE_JUMP = 0.2


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing grid ``0 = t_0 < ... < t_N = T`` with ``N >= 8``."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 9:
            raise DomainError("a time grid needs at least 8 steps")
        if pts[0] != 0.0:
            raise DomainError("a time grid must start at 0")
        if not np.all(np.diff(pts) > 0) or not np.all(np.isfinite(pts)):
            raise DomainError("grid points must be finite and strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, horizon: float, steps: int) -> "TimeGrid":
        if not (horizon > 0 and math.isfinite(horizon)):
            raise DomainError(f"horizon must be positive, got {horizon}")
        if int(steps) != steps or steps < 8:
            raise DomainError(f"need an integer number of steps >= 8, got {steps}")
        return cls(np.linspace(0.0, float(horizon), int(steps) + 1))

    @classmethod
    def graded(cls, uniform_horizon: float, uniform_steps: int, horizon: float,
               ratio: float = 1.01) -> "TimeGrid":
        """Uniform up to ``uniform_horizon``, then steps growing by ``ratio``.

        The last step is shortened so the grid ends exactly at ``horizon``.
        """
        if not horizon > uniform_horizon:
            raise DomainError("graded horizon must exceed the uniform part")
        if ratio <= 1.0:
            raise DomainError("grading ratio must exceed 1")
        base = np.linspace(0.0, uniform_horizon, int(uniform_steps) + 1)
        h = base[1] - base[0]
        pts = list(base)
        t = uniform_horizon
        while t < horizon:
            h *= ratio
            t = min(t + h, horizon)
            if horizon - t < 0.5 * h:
                t = horizon
            pts.append(t)
        return cls(np.array(pts))

    @property
    def steps(self) -> int:
        return self.points.size - 1

    @property
    def horizon(self) -> float:
        return float(self.points[-1])

    @property
    def is_uniform(self) -> bool:
        d = np.diff(self.points)
        return bool(np.allclose(d, d[0], rtol=1e-9, atol=0.0))

    @property
    def step(self) -> float:
        """Uniform step size (raises for graded grids)."""
        if not self.is_uniform:
            raise DomainError("grid is not uniform")
        return self.horizon / self.steps

    def index_of(self, t: float) -> int:
        """Index of grid point ``t`` (to relative precision 1e-9)."""
        i = int(np.argmin(np.abs(self.points - t)))
        if abs(self.points[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise DomainError(f"t={t} is not a grid point")
        return i


@dataclass(frozen=True)
class FptSolution:
    """Density and distribution of the first-passage time on a grid."""

    grid: TimeGrid
    density: np.ndarray
    cdf: np.ndarray
    meta: dict[str, Any] = field(default_factory=dict)
    flags: np.ndarray | None = None

    def __post_init__(self):
        n = self.grid.points.size
        dens = np.asarray(self.density, dtype=float)
        cdf = np.asarray(self.cdf, dtype=float)
        if dens.shape != (n,) or cdf.shape != (n,):
            raise DomainError("density and cdf must match the grid")
        flags = np.zeros(n, dtype=np.int64) if self.flags is None else np.asarray(self.flags, dtype=np.int64)
        for arr in (dens, cdf, flags):
            arr.setflags(write=False)
        object.__setattr__(self, "density", dens)
        object.__setattr__(self, "cdf", cdf)
        object.__setattr__(self, "flags", flags)

    @property
    def t(self) -> np.ndarray:
        return self.grid.points

    @property
    def accuracy_warning(self) -> bool:
        return bool(np.any(self.flags & (FLAG_NEGATIVE | FLAG_COARSE)))

    def density_at(self, t) -> np.ndarray:
        """Piecewise-linear density; raises outside the solved horizon."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > self.grid.horizon * (1 + 1e-12)):
            raise RangeError("requested time lies outside the solved horizon")
        return np.interp(t, self.t, self.density)

    def to_csv(self, path: str | Path | None = None) -> str:
        """Write ``t,f,F,flags`` with a leading ``# meta {json}`` comment line."""
        buf = io.StringIO()
        buf.write("# meta " + json.dumps(self.meta, sort_keys=True, default=str) + "\n")
        buf.write("t,f,F,flags\n")
        for ti, fi, Fi, gi in zip(self.t, self.density, self.cdf, self.flags):
            buf.write(f"{ti:.15g},{fi:.15g},{Fi:.15g},{int(gi)}\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path: str | Path) -> "FptSolution":
        meta: dict[str, Any] = {}
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("# meta"):
                    meta = json.loads(line[len("# meta"):].strip() or "{}")
                    continue
                if line.startswith("#") or line.startswith("t,"):
                    continue
                rows.append([float(v) for v in line.split(",")])
        if not rows:
            raise DomainError(f"{path}: no data rows")
        arr = np.array(rows)
        if arr.shape[1] < 3:
            raise DomainError(f"{path}: expected columns t,f,F[,flags]")
        flags = arr[:, 3].astype(np.int64) if arr.shape[1] > 3 else None
        return cls(TimeGrid(arr[:, 0]), arr[:, 1], arr[:, 2], meta, flags)


def finalize_density(t: np.ndarray, dens: np.ndarray, cdf: np.ndarray):
    """Clip roundoff negatives and build per-point flags."""
    dens = np.array(dens, dtype=float)
    flags = np.zeros(t.size, dtype=np.int64)
    tiny = (dens < 0) & (dens > -NEG_CLIP)
    flags[tiny] |= FLAG_CLIPPED
    dens[tiny] = 0.0
    flags[dens <= -NEG_CLIP] |= FLAG_NEGATIVE
    jumps = np.diff(cdf) > COARSE_JUMP
    flags[1:][jumps] |= FLAG_COARSE
    return dens, flags


@dataclass(frozen=True)
class TailModel:
    """Fit ``log f = a - kappa log t - lam t + B / t`` to the end of a density.

    ``lam`` is constrained to be nonnegative (refit without it otherwise), so
    the model covers both exponential and power-law tails.
    """

    a: float
    kappa: float
    lam: float
    B: float
    start: float

    @classmethod
    def fit(cls, sol: FptSolution, t_from: float | None = None) -> "TailModel":
        t = sol.t
        T = sol.grid.horizon
        lo = 0.4 * T if t_from is None else t_from
        mask = (t >= lo) & (sol.density > 0)
        if mask.sum() < 4:
            raise DomainError("not enough positive density values to fit a tail")
        tt, lf = t[mask], np.log(sol.density[mask])
        cols = [np.ones_like(tt), -np.log(tt), -tt, 1.0 / tt]
        coef, *_ = np.linalg.lstsq(np.column_stack(cols), lf, rcond=None)
        if coef[2] < 0:
            c3, *_ = np.linalg.lstsq(np.column_stack([cols[0], cols[1], cols[3]]), lf, rcond=None)
            coef = np.array([c3[0], c3[1], 0.0, c3[2]])
        return cls(*map(float, coef), start=T)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(self.a - self.kappa * np.log(t) - self.lam * t + self.B / t)

    def integrate(self, weight: Callable[[float], float] | None = None) -> float:
        """``int_T^inf weight(t) * model(t) dt`` (weight defaults to 1)."""
        w = weight if weight is not None else (lambda t: 1.0)
        val, _ = integrate.quad(lambda t: w(t) * float(self(t)), self.start, np.inf, limit=200)
        return float(val)


__all__ = ["TimeGrid", "FptSolution", "TailModel", "finalize_density",
           "FLAG_CLIPPED", "FLAG_NEGATIVE", "FLAG_COARSE"]
