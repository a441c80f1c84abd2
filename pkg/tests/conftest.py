import pytest

from weakharnack.spaces import make_path, make_stable_torus, make_torus, make_ultrametric_product


@pytest.fixture(scope="session")
def path5():
    return make_path(5)


@pytest.fixture(scope="session")
def torus8():
    return make_torus(8)


@pytest.fixture(scope="session")
def torus64():
    return make_torus(64)


@pytest.fixture(scope="session")
def stable64():
    return make_stable_torus(64)


@pytest.fixture(scope="session")
def ultra44():
    return make_ultrametric_product(2, (4, 4))


# one summary line per acceptance criterion, taken from the test outcome so
# that errors show up as failures too
ACCEPTANCE_DETAILS = {}
_acceptance_outcomes = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or report.outcome != "passed":
        num = int(report.nodeid.split("::")[-1].split("_")[2])
        if _acceptance_outcomes.get(num, "passed") == "passed":
            _acceptance_outcomes[num] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_acceptance_outcomes):
        verdict = "PASS" if _acceptance_outcomes[num] == "passed" else "FAIL"
        detail = ACCEPTANCE_DETAILS.get(num, "no result recorded")
        terminalreporter.write_line(f"criterion {num:2d}: {verdict}  {detail}")
