import pytest

from bnsat.formula import Formula

# worked examples
PHI = ((1, 2, -3), (-2, 3), (-1, -2, -3), (-1, 2))
PHI1 = ((1, -2), (-1, 2), (2, 3))
PHI2 = ((1, 2), (1, -3), (-1, -3), (2, 3), (1, 3))


@pytest.fixture
def phi():
    return Formula(3, PHI, "phi")


@pytest.fixture
def phi1():
    return Formula(3, PHI1, "phi1")


@pytest.fixture
def phi2():
    return Formula(3, PHI2, "phi2")


@pytest.fixture
def phi1_cnf(tmp_path):
    path = tmp_path / "phi1.cnf"
    path.write_text("c phi1\np cnf 3 3\n1 -2 0\n-1 2 0\n2 3 0\n")
    return path


@pytest.fixture
def phi2_cnf(tmp_path):
    path = tmp_path / "phi2.cnf"
    path.write_text("p cnf 3 5\n1 2 0\n1 -3 0\n-1 -3 0\n2 3 0\n1 3 0\n")
    return path


# acceptance outcomes, filled in by test_acceptance and echoed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
