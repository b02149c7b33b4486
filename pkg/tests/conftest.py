import re

import pytest

from lowtrotter.pauli_model import (PartitionedHamiltonian, TermGroup, heisenberg_chain,
                                    shift_groups_psd, term, tfim_chain)

_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+)")


@pytest.fixture(scope="session")
def tfim4():
    return tfim_chain(4)


@pytest.fixture(scope="session")
def tfim6():
    return tfim_chain(6)


@pytest.fixture(scope="session")
def heis6():
    return heisenberg_chain(6)


@pytest.fixture(scope="session")
def heis6_psd():
    return shift_groups_psd(heisenberg_chain(6))


@pytest.fixture(scope="session")
def commuting2():
    """Two groups that commute with each other: Z fields and ZZ bonds."""
    n = 3
    a = TermGroup((term(n, "Z0", 0.7), term(n, "Z2", -0.4)), n_qubits=n)
    b = TermGroup((term(n, "Z0 Z1", 1.1), term(n, "Z1 Z2", 0.3)), n_qubits=n)
    return PartitionedHamiltonian(n, (a, b), "commuting3")


# --- one summary line per acceptance criterion ----------------------------------

_RESULTS: dict = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2))
    outcome = "FAIL" if report.failed else ("PASS" if report.passed else report.outcome.upper())
    if report.when == "call" or report.failed:
        _RESULTS[key] = outcome


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for (num, name), outcome in sorted(_RESULTS.items()):
        terminalreporter.write_line(f"criterion {num:2d} {name}: {outcome}")
