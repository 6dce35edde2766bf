import time

import pytest

from kinkcollide import ansatz as az

SPEEDS = (0.1, 0.05, 0.025)

_acceptance_lines = []


def record_acceptance(line):
    print(line)
    _acceptance_lines.append(line)


@pytest.fixture(scope="session")
def acceptance_log():
    return record_acceptance


@pytest.fixture(scope="session")
def phi2_specs():
    """phi_2 at the three study speeds, with the build time."""
    t0 = time.perf_counter()
    specs = {v: az.build_ansatz(v, 2) for v in SPEEDS}
    return specs, time.perf_counter() - t0


@pytest.fixture(scope="session")
def phi3_specs(phi2_specs):
    specs, _ = phi2_specs
    t0 = time.perf_counter()
    raised = {v: az.raise_order(s) for v, s in specs.items()}
    return raised, time.perf_counter() - t0


@pytest.fixture(scope="session")
def spec_v01(phi2_specs):
    return phi2_specs[0][0.1]


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
