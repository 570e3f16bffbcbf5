import cmath
import math

import numpy as np
import pytest

from fptkit import boundary as bd
from fptkit import identities as idn
from fptkit import volterra as vt
from fptkit.errors import DomainError, RangeError
from fptkit.grid import TimeGrid

from conftest import sup_on


@pytest.fixture(scope="module")
def const20():
    b = bd.constant(-1.0)
    return b, vt.solve_first_kind(-1, b, TimeGrid.uniform(20.0, 2048))


@pytest.fixture(scope="module")
def quad_up():
    b = bd.quadratic(1.0, 1.0)
    sol = vt.solve_first_kind(-1, b, TimeGrid.uniform(4.0, 1024))
    assert 1 - sol.cdf[-1] <= 1e-3
    return b, sol


def test_probe_validation():
    with pytest.raises(DomainError):
        idn.FredholmProbe(-0.5)
    with pytest.raises(DomainError):
        idn.FredholmProbe(1.0, tail_policy="guess")
    assert idn.FredholmProbe(1.0).alpha == 1 + 0j


def test_alpha_zero_is_total_mass(const_solutions, const_b):
    r = idn.fredholm_residual(const_b, const_solutions[-1], idn.FredholmProbe(0.0, tail_policy="analytic-fit"))
    assert r.integral.real == pytest.approx(const_solutions[-1].cdf[-1], rel=1e-14)
    assert abs(r.residual) <= 1e-2


def test_constant_alpha_one(const20):
    b, sol = const20
    r = idn.fredholm_residual(b, sol, idn.FredholmProbe(1.0))
    assert abs(r.residual) <= 5e-3
    assert r.tail_bound == pytest.approx(math.exp(1 - 10) * r.tail_mass)


def test_constant_complex_alpha(const20):
    b, sol = const20
    r = idn.fredholm_residual(b, sol, idn.FredholmProbe(1 + 1j, tail_policy="analytic-fit"))
    assert abs(r.residual) <= 1e-2


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, cmath.exp(1j * math.pi / 6), cmath.exp(1j * math.pi / 4)])
def test_class_b_builtin(quad_up, alpha):
    b, sol = quad_up
    tol = 1e-2 if isinstance(alpha, complex) else 5e-3
    assert abs(idn.fredholm_residual(b, sol, idn.FredholmProbe(alpha)).residual) <= tol


def test_complex_alpha_admissibility(const_solutions, const_b):
    sol = const_solutions[-1]
    with pytest.raises(DomainError):
        idn.fredholm_residual(const_b, sol, idn.FredholmProbe(cmath.exp(1j * math.pi / 3), tail_policy="analytic-fit"))
    down = bd.linear(1.0, -0.3)
    down_sol = vt.solve_first_kind(-1, down, sol.grid)
    with pytest.raises(DomainError):
        idn.fredholm_residual(down, down_sol, idn.FredholmProbe(1 + 0.5j, tail_policy="analytic-fit"))
    with pytest.raises(DomainError):
        idn.fredholm_residual(down, down_sol, idn.FredholmProbe(0.1, tail_policy="analytic-fit"))


def test_bound_only_needs_long_horizon(const_solutions, const_b):
    with pytest.raises(RangeError):
        idn.fredholm_residual(const_b, const_solutions[-1], idn.FredholmProbe(0.5))
    with pytest.raises(RangeError):
        idn.fredholm_residual(const_b, const_solutions[-1], idn.FredholmProbe(0.5, horizon=3.0))


def test_drift_relation(const_solutions, const_b):
    sol = const_solutions[-1]
    assert np.all(idn.drift_relation_check(const_b, sol, 0.0).residual == 0.0)
    chk = idn.drift_relation_check(const_b, sol, 0.5)
    assert chk.sup(0.1, 2.0) <= 5e-3


def test_drift_sign_symmetry(const_solutions, const_b):
    sol = const_solutions[-1]
    alpha = 0.5
    drifted_b = bd.apply_transform(const_b, bd.TransformParams(alpha=alpha))
    drifted = vt.solve_first_kind(-1, drifted_b, sol.grid)
    fwd = idn.drift_relation_check(const_b, sol, alpha, drifted)
    back = idn.drift_relation_check(drifted_b, drifted, -alpha, sol)
    t = sol.t
    mapped = -back.residual * np.exp(-alpha * const_b(t) - alpha ** 2 * t / 2)
    assert np.max(np.abs(mapped - fwd.residual)) <= 1e-10


def test_drift_grid_mismatch(const_solutions, const_b):
    other = vt.solve_first_kind(-1, const_b, TimeGrid.uniform(2.0, 128))
    with pytest.raises(DomainError):
        idn.drift_relation_check(const_b, const_solutions[-1], 0.5, other)


@pytest.mark.parametrize("beta", [1.0, 2.0])
def test_volterra_fredholm_equivalence(const20, beta):
    # Laplace transform in t of the p = 0 offset equation at y below the bound
    b, sol = const20
    y = -2.0
    alpha = math.sqrt(2 * beta)
    spec = vt.KernelSpec(0.0, "offset")
    t = sol.t[1:]
    res = np.array([vt.residual_family(spec, b, sol, ti, y).value for ti in t])
    g = np.exp(-beta * t) * res
    lap = float(np.sum(0.5 * (g[1:] + g[:-1]) * np.diff(t)) + 0.5 * g[0] * t[0])
    normalised = lap / (math.sqrt(math.pi / beta) * math.exp(y * alpha))
    fred = idn.fredholm_residual(b, sol, idn.FredholmProbe(alpha)).residual.real
    assert abs(normalised + fred) <= 1e-2
