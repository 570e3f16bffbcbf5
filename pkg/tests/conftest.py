import numpy as np
import pytest

from fptkit import boundary as bd
from fptkit.grid import TimeGrid
from fptkit.volterra import solve_first_kind, solve_second_kind


@pytest.fixture(scope="session")
def grid2():
    return TimeGrid.uniform(2.0, 256)


@pytest.fixture(scope="session")
def const_b():
    return bd.constant(-1.0)


@pytest.fixture(scope="session")
def lin_b():
    return bd.linear(1.0, 0.5)


@pytest.fixture(scope="session")
def const_solutions(const_b, grid2):
    return {
        -1: solve_first_kind(-1, const_b, grid2),
        0: solve_first_kind(0, const_b, grid2),
        "second-kind": solve_second_kind(const_b, grid2),
    }


@pytest.fixture(scope="session")
def lin_solutions(lin_b, grid2):
    return {-1: solve_first_kind(-1, lin_b, grid2), 0: solve_first_kind(0, lin_b, grid2)}


def sup_on(t, err, lo, hi=np.inf):
    mask = (t >= lo - 1e-12) & (t <= hi + 1e-12)
    return float(np.max(np.abs(np.asarray(err)[mask])))
