import pathlib

import numpy as np
import pytest

from oracles import make_problem


@pytest.fixture
def fixtures_dir() -> pathlib.Path:
    return pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture
def toy_problem():
    """min x + y  s.t. x + y >= 1, 0 <= x, y <= 1; optimum 1."""
    return make_problem(
        c=[1.0, 1.0], G=[[1.0, 1.0]], h=[1.0], l=[0.0, 0.0], u=[1.0, 1.0], name="toy"
    )


@pytest.fixture
def one_d_problem():
    """min x  s.t. x >= 1, 0 <= x <= 10; optimum 1."""
    return make_problem(c=[1.0], G=[[1.0]], h=[1.0], l=[0.0], u=[10.0], name="one-d")


@pytest.fixture
def primal_infeasible_problem():
    """x free with x >= 1 and -x >= 0: no feasible point."""
    return make_problem(
        c=[1.0], G=[[1.0], [-1.0]], h=[1.0, 0.0], l=[-np.inf], u=[np.inf], name="pinf"
    )


@pytest.fixture
def dual_infeasible_problem():
    """min -x  s.t. x >= 0 with u = +inf: primal unbounded."""
    return make_problem(
        c=[-1.0], G=[[1.0]], h=[0.0], l=[0.0], u=[np.inf], name="dinf"
    )
