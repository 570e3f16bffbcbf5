"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from fptkit import _pykernels

try:
    from fptkit import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _cases():
    z = np.linspace(-6.0, 6.0, 200)
    rng = np.random.default_rng(0)
    steps = 128
    normals = rng.standard_normal((20_000, steps))
    uniforms = rng.random((20_000, steps))
    t = np.linspace(0.0, 2.0, steps + 1)
    bvals = np.full(steps + 1, -1.0)
    dts = np.diff(t)
    return {
        "pcf_scaled_quad(q=-1.5, 200 z)": lambda m: m.pcf_scaled_quad(-1.5, z),
        "mc_hits(20000 paths x 128 steps, bridge)": lambda m: m.mc_hits(normals, uniforms, bvals, dts, True),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'kernel':45s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, fn in _cases().items():
        py = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat)) * 1e3
        if _ckernels is None:
            print(f"{name:45s} {py:12.2f} {'n/a':>12s} {'':>8s}")
            continue
        cy = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:45s} {py:12.2f} {cy:12.2f} {py / cy:7.1f}x")


if __name__ == "__main__":
    main()
