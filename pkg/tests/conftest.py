import pytest

from malcev import aoag, tfag

# one line per acceptance criterion, filled in by test_acceptance
CRITERIA: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[n])


@pytest.fixture(scope="session")
def qgroup():
    return tfag.standard_presentation(tfag.GroupSpec.full())


@pytest.fixture(scope="session")
def nondiv():
    return tfag.standard_presentation(tfag.GroupSpec.cyclic([[2], []]))


@pytest.fixture(scope="session")
def loggroup():
    return aoag.standard_presentation()
