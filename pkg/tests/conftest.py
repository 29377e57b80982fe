import pytest

# filled by tests/test_acceptance.py: criterion number -> (passed, detail)
CRITERIA = {}


def record(number, passed, detail=""):
    CRITERIA[number] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        passed, detail = CRITERIA[number]
        terminalreporter.write_line(
            f"criterion {number}: {'PASS' if passed else 'FAIL'}" + (f"  {detail}" if detail else "")
        )


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240611)
