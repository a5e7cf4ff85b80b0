import math

import pytest

from siegelmate.blaschke import PetersenModel, build_B, solve_t
from siegelmate.cf_arith import ContinuedFraction

GOLDEN = (math.sqrt(5) - 1) / 2

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def golden_cf():
    return ContinuedFraction.golden()


@pytest.fixture(scope="session")
def petersen_solution(golden_cf):
    return solve_t(golden_cf, "petersen")


@pytest.fixture(scope="session")
def mating_solution(golden_cf):
    return solve_t(golden_cf, "mating", golden_cf)


@pytest.fixture(scope="session")
def petersen_golden(petersen_solution):
    return petersen_solution.model


@pytest.fixture(scope="session")
def mating_golden(mating_solution):
    return mating_solution.model


@pytest.fixture(scope="session")
def petersen_tree(petersen_golden):
    from siegelmate.drops import build_drop_tree
    return build_drop_tree(petersen_golden, "disk", 3, 12)


@pytest.fixture(scope="session")
def mating_tree(mating_golden):
    from siegelmate.drops import build_drop_tree
    return build_drop_tree(mating_golden, "disk", 3, 12)
