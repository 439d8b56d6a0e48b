import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from freesupport import barycenter

settings.register_profile(
    "repo", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")

# every barycenter trace produced during the session, audited for monotone descent
SOLVER_TRACES: list = []
barycenter.observers.append(lambda state: SOLVER_TRACES.append(state.objective_trace))

ACCEPTANCE_LINES: list = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def acceptance_log():
    def record(number, title, passed, detail=""):
        ACCEPTANCE_LINES.append((number, f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: {title}"
                                         + (f" ({detail})" if detail else "")))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def pytest_collection_modifyitems(session, config, items):
    # acceptance runs last so the descent audit sees every solver trace of the session
    items.sort(key=lambda item: item.module.__name__.endswith("test_acceptance"))
