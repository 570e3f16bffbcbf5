"""Select the compiled kernels when available, else the pure-Python ones.

Set ``FPTKIT_PURE=1`` to force the fallback (useful for benchmarking and
for checking that both paths agree).
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("FPTKIT_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _pykernels

pcf_scaled_quad = _impl.pcf_scaled_quad
mc_hits = _impl.mc_hits

__all__ = ["BACKEND", "pcf_scaled_quad", "mc_hits"]
