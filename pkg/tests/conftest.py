from fractions import Fraction

import pytest
from hypothesis import settings

from ultratree import DistanceLadder, cantor, realize_space, validate_ultrametric

ACCEPTANCE_LINES: list[str] = []

# the brute-force oracles are cubic in pure Python; wall time varies too much for a deadline
settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


@pytest.fixture
def ladder2():
    return DistanceLadder([1, Fraction(1, 2)])


@pytest.fixture
def three_point(ladder2):
    # d(a,b)=1, d(a,c)=1, d(b,c)=1/2
    return validate_ultrametric("abc", ladder2, [[-1, 0, 0], [0, -1, 1], [0, 1, -1]])


@pytest.fixture
def cantor2():
    return realize_space(cantor(2))[0]


@pytest.fixture
def cantor3():
    return realize_space(cantor(3))[0]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
