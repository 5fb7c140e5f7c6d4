from functools import lru_cache

import pytest

from profile_solver.derivatives import differentiate
from profile_solver.mesh import MeshSpec
from profile_solver.profile import Profile
from profile_solver.solver import solve_profile
from qtensor.core import BulkParams


@lru_cache(maxsize=None)
def _solved(t: float, k: int, r_max: float, nodes: int) -> Profile:
    return differentiate(solve_profile(BulkParams(t, k), MeshSpec(r_max=r_max, nodes=nodes)))


@pytest.fixture(scope='session')
def solved():
    """ Cached solver: solved(t, k, r_max=40.0, nodes=1024) returns a differentiated profile. """
    def factory(t: float, k: int, r_max: float = 40.0, nodes: int = 1024) -> Profile:
        return _solved(float(t), int(k), float(r_max), int(nodes))
    return factory


@pytest.fixture(scope='session')
def profile_k1(solved) -> Profile:
    return solved(0.5, 1)


@pytest.fixture(scope='session')
def profile_k2(solved) -> Profile:
    return solved(0.5, 2)
