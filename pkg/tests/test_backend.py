import numpy as np
import pytest

from fptkit import _backend, _pykernels

ck = pytest.importorskip("fptkit._ckernels")


def test_backend_selection():
    assert _backend.BACKEND in ("cython", "python")


@pytest.mark.parametrize("q", [-1.0, -1.25, -1.5, -2.5, -4.0])
def test_pcf_quadrature_agreement(q):
    z = np.linspace(-6, 6, 25)
    a = ck.pcf_scaled_quad(q, z)
    b = _pykernels.pcf_scaled_quad(q, z)
    assert np.allclose(a, b, rtol=1e-13, atol=1e-300)


@pytest.mark.parametrize("bridge", [True, False])
def test_mc_kernel_agreement(bridge):
    rng = np.random.default_rng(0)
    n, steps = 500, 64
    t = np.linspace(0, 2, steps + 1)
    normals = rng.standard_normal((n, steps))
    uniforms = rng.random((n, steps))
    bvals = np.full(steps + 1, -1.0)
    dts = np.diff(t)
    assert np.array_equal(ck.mc_hits(normals, uniforms, bvals, dts, bridge),
                          _pykernels.mc_hits(normals, uniforms, bvals, dts, bridge))


def test_pure_python_fallback(monkeypatch):
    import importlib
    monkeypatch.setenv("FPTKIT_PURE", "1")
    mod = importlib.reload(_backend)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("FPTKIT_PURE")
        importlib.reload(_backend)
