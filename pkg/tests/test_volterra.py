import math

import numpy as np
import pytest

from fptkit import boundary as bd
from fptkit import volterra as vt
from fptkit.closedform import bachelier_levy_density, reflection_cdf, reflection_density
from fptkit.errors import DomainError, RangeError
from fptkit.grid import FptSolution, TimeGrid

from conftest import sup_on

C1_BUILTINS = [bd.constant(-1.0), bd.linear(1.0, 0.5), bd.linear(1.0, -0.3),
               bd.quadratic(-1.0, 1.0), bd.quadratic(1.0, 1.0)]
ALL_BUILTINS = C1_BUILTINS + [bd.sqrt(1.0, 2.0), bd.sqrt(-1.0, 1.0)]


def _name(b):
    return f"{b.spec['kind']}{tuple(b.spec['params'].values())}"


@pytest.fixture(scope="module")
def solved():
    g = vt_grid()
    return {_name(b): (b, vt.solve_first_kind(-1, b, g), vt.solve_first_kind(0, b, g)) for b in ALL_BUILTINS}


def vt_grid():
    return TimeGrid.uniform(2.0, 256)


@pytest.mark.parametrize("mu", [0.0, 0.25, 0.5, 0.75])
def test_product_weights_exact_for_linear_functions(mu):
    t = np.sort(np.concatenate([[0.0], np.random.default_rng(3).uniform(0, 2, 20), [2.0]]))
    i = t.size - 1
    w = vt.product_weights(t, i, mu)
    T = t[i]
    m0 = T ** (1 - mu) / (1 - mu)
    m1 = T ** (2 - mu) * (1 / (1 - mu) - 1 / (2 - mu))
    assert np.sum(w) == pytest.approx(m0, rel=1e-13)
    assert np.dot(w, 1.0 + 3.0 * t) == pytest.approx(m0 + 3.0 * m1, rel=1e-13)


def test_kernel_spec_validation():
    with pytest.raises(DomainError):
        vt.KernelSpec(1.0, "limit")
    with pytest.raises(DomainError):
        vt.KernelSpec(0.0, "sideways")
    rough = bd.table([[0, -1.0], [1, -0.7], [2, -0.9]], smoothness="continuous")
    vt.KernelSpec(-1.0).check_boundary(rough)
    with pytest.raises(DomainError):
        vt.KernelSpec(-0.5).check_boundary(rough)
    with pytest.raises(DomainError):
        vt.KernelSpec(0.5).check_boundary(bd.sqrt(1.0, 2.0))


def test_solver_inputs():
    g = vt_grid()
    with pytest.raises(DomainError):
        vt.solve_first_kind(1, bd.constant(-1.0), g)
    with pytest.raises(DomainError):
        vt.solve_second_kind(bd.sqrt(1.0, 2.0), g)
    with pytest.raises(DomainError):
        TimeGrid.uniform(1.0, 4)


@pytest.mark.parametrize("p", [-1, 0])
def test_reflection_oracle(const_solutions, p):
    sol = const_solutions[p]
    assert sup_on(sol.t, sol.cdf - reflection_cdf(-1.0, sol.t), 0.1) <= 1e-3
    assert sup_on(sol.t, sol.density - reflection_density(-1.0, sol.t), 0.1) <= 1e-3


def test_bachelier_levy_oracle(lin_solutions):
    for sol in lin_solutions.values():
        assert sup_on(sol.t, sol.density - bachelier_levy_density(1.0, 0.5, sol.t), 0.1) <= 1e-3


def test_second_kind_matches_reflection(const_solutions):
    sol = const_solutions["second-kind"]
    assert sup_on(sol.t, sol.density - reflection_density(-1.0, sol.t), 0.1) <= 2e-3


def test_second_kind_flipped_sign_is_wrong(const_b, grid2):
    wrong = vt.solve_second_kind(const_b, grid2, sign=1.0)
    err = sup_on(grid2.points, wrong.density - reflection_density(-1.0, grid2.points), 0.1)
    assert err > 0.1


@pytest.mark.parametrize("p", [-1, 0])
def test_grid_refinement(const_b, p):
    errs = []
    for n in (128, 256, 512):
        sol = vt.solve_first_kind(p, const_b, TimeGrid.uniform(2.0, n))
        errs.append(sup_on(sol.t, sol.density - reflection_density(-1.0, sol.t), 0.1))
    assert errs[0] / errs[1] >= 1.8 and errs[1] / errs[2] >= 1.8


@pytest.mark.parametrize("b", ALL_BUILTINS, ids=_name)
def test_cross_p_uniqueness_and_monotone_cdf(solved, b):
    _, s1, s0 = solved[_name(b)]
    assert sup_on(s1.t, s1.density - s0.density, 0.1) <= 5e-3
    for s in (s1, s0):
        assert np.all(np.diff(s.cdf) >= 0) and s.cdf[-1] <= 1 + 1e-6
        assert not s.accuracy_warning


@pytest.mark.parametrize("b", ALL_BUILTINS, ids=_name)
def test_residual_closure(solved, b):
    _, sol, _ = solved[_name(b)]
    for t in (0.5, 1.0, 2.0):
        y = float(b(t)) - 1.0
        for p in (-1.0, -0.5, 0.0):
            assert vt.residual_family(vt.KernelSpec(p, "limit"), b, sol, t).relative <= 5e-3
        for p in (-2.0, 0.5):
            assert vt.residual_family(vt.KernelSpec(p, "offset"), b, sol, t, y).relative <= 5e-3
        # the pre-limit equation holds for every real p
        assert vt.residual_family(vt.KernelSpec(1.0, "offset"), b, sol, t, y).relative <= 5e-3


def test_offset_mode_needs_level_below_boundary(const_solutions, const_b):
    with pytest.raises(DomainError):
        vt.residual_family(vt.KernelSpec(0.5, "offset"), const_b, const_solutions[-1], 1.0, -0.5)


def test_case4_and_case5(const_solutions, const_b):
    sol = const_solutions[0]
    for t in (0.5, 1.0, 2.0):
        assert vt.residual_case4(const_b, sol, t).relative <= 5e-3
        assert vt.residual_case5(const_b, sol, t).relative <= 5e-3
    # Case 4 in K form agrees with the p = -1/2 member
    r4 = vt.residual_case4(const_b, sol, 1.0)
    rp = vt.residual_family(vt.KernelSpec(-0.5), const_b, sol, 1.0)
    assert r4.relative == pytest.approx(rp.relative, rel=1e-6)


def test_case4_rejects_increasing_boundary(lin_solutions, lin_b):
    with pytest.raises(DomainError):
        vt.residual_case4(lin_b, lin_solutions[-1], 1.0)


@pytest.mark.parametrize("key", [-1, 0, "second-kind"])
def test_widder_single_atom(const_solutions, const_b, key):
    r = vt.residual_widder([(0.0, 1.0)], const_b, const_solutions[key], 1.0, -2.0)
    assert abs(r.value) <= 1e-5


@pytest.mark.parametrize("key", [-1, 0, "second-kind"])
def test_widder_two_atoms(const_solutions, const_b, key):
    r = vt.residual_widder([(0.0, 0.5), (1.0, 0.5)], const_b, const_solutions[key], 1.0, -2.0)
    assert abs(r.value) <= 1e-4 * r.lhs


def test_widder_zero_candidate_and_empty_atoms(const_b, grid2):
    zero = FptSolution(grid2, np.zeros(grid2.steps + 1), np.zeros(grid2.steps + 1))
    atoms = [(0.0, 0.5), (1.0, 0.5)]
    r = vt.residual_widder(atoms, const_b, zero, 1.0, -2.0)
    assert r.value == pytest.approx(float(vt.heat_mixture(atoms, 1.0, -2.0))) and r.value > 0
    with pytest.raises(DomainError):
        vt.residual_widder([], const_b, zero, 1.0, -2.0)


def test_single_atom_widder_equals_p0_offset(const_solutions, const_b):
    # one atom at 0 gives the p = 0 kernel up to the factor 1/sqrt(2 pi)
    sol = const_solutions[0]
    rw = vt.residual_widder([(0.0, 1.0)], const_b, sol, 1.0, -2.0)
    rf = vt.residual_family(vt.KernelSpec(0.0, "offset"), const_b, sol, 1.0, -2.0)
    assert rw.value == pytest.approx(rf.value / math.sqrt(2 * math.pi), rel=1e-10, abs=1e-15)


def test_csv_roundtrip(tmp_path, const_solutions):
    sol = const_solutions[-1]
    path = tmp_path / "f.csv"
    sol.to_csv(path)
    again = FptSolution.from_csv(path)
    assert np.allclose(again.density, sol.density, rtol=1e-14, atol=0)
    assert again.meta["p"] == -1 and len(path.read_text().splitlines()) == 2 + sol.t.size
    with pytest.raises(RangeError):
        sol.density_at(2.5)
