"""Shared fixture laws.

I1 is built here from its generating product rather than typed in, so the
expected atom masses in the tests act as an independent hand computation.
"""

from fractions import Fraction as F

import pytest

from xci.dist import BlockPartition, FiniteDistribution

U = {0: F(1, 2), 2: F(1, 4), 3: F(1, 4)}


def product_uv() -> FiniteDistribution:
    return FiniteDistribution({(a, c): U[a] * U[c] for a in U for c in U})


def make_i1() -> FiniteDistribution:
    atoms = {(a, c): U[a] * U[c] for a in U for c in U if a > 1 or c > 1}
    return FiniteDistribution(atoms, normalize=True)


def make_i2() -> FiniteDistribution:
    atoms = dict(make_i1().atoms)
    atoms[(F(2), F(2))] = F(1, 8)
    atoms[(F(2), F(3))] = F(1, 24)
    return FiniteDistribution(atoms)


def make_i3() -> FiniteDistribution:
    return FiniteDistribution({(2, 0): F(1, 4), (3, 0): F(1, 4), (0, 2): F(1, 4), (0, 3): F(1, 4)})


def make_i4() -> FiniteDistribution:
    return FiniteDistribution({(2, 0): F(1, 2), (2, 3): F(1, 2)})


@pytest.fixture
def I1():
    return make_i1()


@pytest.fixture
def I2():
    return make_i2()


@pytest.fixture
def I3():
    return make_i3()


@pytest.fixture
def I4():
    return make_i4()


@pytest.fixture
def P2():
    return BlockPartition((0,), (), (1,))


@pytest.fixture
def P3():
    return BlockPartition((0,), (1,), (2,))


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
