import numpy as np
import pytest

#: collected "[acceptance] ..." lines, echoed in the terminal summary
ACCEPTANCE_LINES = []


def record_acceptance(criterion: str, passed: bool, detail: str = ""):
    status = "PASS" if passed else "FAIL"
    line = f"[acceptance] {criterion}: {status}" + (f" ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260809)
