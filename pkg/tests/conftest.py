import pytest

from nlscollapse.profiles import solve_ground_state
from nlscollapse.selfsimilar import solve_Q_profile


@pytest.fixture(scope="session")
def gs5():
    return solve_ground_state(1, 5.0)


@pytest.fixture(scope="session")
def gs7():
    return solve_ground_state(1, 7.0)


@pytest.fixture(scope="session")
def gs_townes():
    return solve_ground_state(2, 3.0)


@pytest.fixture(scope="session")
def q7():
    return solve_Q_profile(7.0)
