"""Monte Carlo estimate of the first-passage distribution.

Paths are simulated exactly on the grid. Between grid points a crossing is
also declared with the Brownian-bridge probability for the straight line
joining the boundary values. Work is split into fixed-size batches, each
seeded from ``SeedSequence(seed, spawn_key=(k,))``, so results do not depend
on the number of worker threads (``FPT_NUM_THREADS``).
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _backend
from .boundary import Boundary
from .errors import DomainError
from .grid import TimeGrid

BATCH_SIZE = 16384
MIN_PATHS = 1000


def bridge_crossing_prob(w0, w1, b0, b1, dt):
    """Probability that a Brownian bridge from ``w0`` to ``w1`` over ``dt`` dips below
    the line from ``b0`` to ``b1``: ``exp(-2 (w0 - b0)(w1 - b1) / dt)``.

    Endpoints on or below the line give 1 (the crossing is certain).
    """
    if not dt > 0:
        raise DomainError("dt must be positive")
    g0 = np.asarray(w0, dtype=float) - b0
    g1 = np.asarray(w1, dtype=float) - b1
    out = np.where((g0 <= 0) | (g1 <= 0), 1.0, np.exp(-2.0 * np.maximum(g0, 0) * np.maximum(g1, 0) / dt))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class McEstimate:
    """Empirical distribution function with binomial standard errors."""

    grid: TimeGrid
    cdf_hat: np.ndarray
    stderr: np.ndarray
    n_paths: int
    seed: int
    bridge: bool = True
    meta: dict = field(default_factory=dict)

    def density_at(self, t: float, half_width: float) -> tuple[float, float]:
        """Finite-difference density over ``[t - half_width, t + half_width]`` and its standard error.

        Both ends must be grid points.
        """
        i0 = self.grid.index_of(t - half_width)
        i1 = self.grid.index_of(t + half_width)
        p = float(self.cdf_hat[i1] - self.cdf_hat[i0])
        width = float(self.grid.points[i1] - self.grid.points[i0])
        return p / width, math.sqrt(max(p * (1 - p), 0.0) / self.n_paths) / width

    def to_csv(self, path: str | Path | None = None) -> str:
        lines = [f"# mc n_paths={self.n_paths} seed={self.seed} bridge={int(self.bridge)}", "t,F_hat,stderr"]
        lines += [f"{t:.15g},{F:.15g},{s:.15g}" for t, F, s in zip(self.grid.points, self.cdf_hat, self.stderr)]
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path: str | Path) -> "McEstimate":
        info = {"n_paths": 0, "seed": 0, "bridge": 1}
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if line.startswith("# mc"):
                    for kv in line[4:].split():
                        k, v = kv.split("=")
                        info[k] = int(v)
                elif line and not line.startswith(("#", "t,")):
                    rows.append([float(v) for v in line.split(",")])
        arr = np.array(rows)
        return cls(TimeGrid(arr[:, 0]), arr[:, 1], arr[:, 2], info["n_paths"], info["seed"], bool(info["bridge"]))


def _threads() -> int:
    env = os.environ.get("FPT_NUM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"FPT_NUM_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _run_batch(k: int, size: int, seed: int, bvals, dts, bridge: bool, n_steps: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))
    normals = rng.standard_normal((size, n_steps))
    # uniforms are only read when the bridge correction is on
    uniforms = rng.random((size, n_steps)) if bridge else np.ones((1, 1))
    hits = _backend.mc_hits(normals, uniforms, bvals, dts, bridge)
    return np.bincount(hits, minlength=n_steps + 2)


def mc_fpt(b: Boundary, grid: TimeGrid, n_paths: int, seed: int, bridge: bool = True,
           threads: int | None = None) -> McEstimate:
    """Estimate ``P(tau <= t_i)`` on ``grid`` from ``n_paths`` simulated paths.

    Parameters
    ----------
    b : Boundary
    grid : TimeGrid
        Simulation grid; the estimate is reported at its points.
    n_paths : int
        At least 1000.
    seed : int
        Root seed; fixes the result bit for bit.
    bridge : bool
        Add the bridge crossing correction (default). ``False`` gives the
        sign-only estimator on the same normal draws.
    threads : int, optional
        Worker threads; defaults to ``FPT_NUM_THREADS`` or the core count.
    """
    if int(n_paths) != n_paths or n_paths < MIN_PATHS:
        raise DomainError(f"need at least {MIN_PATHS} paths")
    n_paths = int(n_paths)
    seed = int(seed)
    if seed < 0:
        raise DomainError("seed must be nonnegative")
    t = grid.points
    bvals = np.ascontiguousarray(b(t), dtype=float)
    if bvals[0] >= 0:
        raise DomainError("simulation needs b(0) < 0")
    dts = np.ascontiguousarray(np.diff(t))
    n_steps = grid.steps
    sizes = [min(BATCH_SIZE, n_paths - k * BATCH_SIZE) for k in range(-(-n_paths // BATCH_SIZE))]
    workers = min(threads or _threads(), len(sizes))
    jobs = [(k, m, seed, bvals, dts, bridge, n_steps) for k, m in enumerate(sizes)]
    if workers <= 1:
        counts = [_run_batch(*j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(lambda j: _run_batch(*j), jobs))
    total = np.sum(counts, axis=0)
    cdf = np.cumsum(total[: n_steps + 1]) / n_paths
    stderr = np.sqrt(cdf * (1.0 - cdf) / n_paths)
    return McEstimate(grid, cdf, stderr, n_paths, seed, bridge,
                      {"boundary": b.fingerprint(), "backend": _backend.BACKEND})


__all__ = ["bridge_crossing_prob", "McEstimate", "mc_fpt", "BATCH_SIZE"]
