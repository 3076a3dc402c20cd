import json

import pytest
from hypothesis import strategies as hst

from idcert import states as st
from idcert.cli import data_path
from idcert.pauli import parse_pauli
from idcert.stabilizer import state_stabilizer


def load_fixture(name):
    with open(data_path(name)) as fh:
        return json.load(fh)


def paulis(n, signed=True):
    """Hypothesis strategy for Hermitian n-qubit Pauli operators."""
    letters = hst.text("IXYZ", min_size=n, max_size=n)
    if not signed:
        return letters.map(parse_pauli)
    return hst.tuples(hst.sampled_from("+-"), letters).map(lambda t: parse_pauli(t[0] + t[1]))


@pytest.fixture(scope="session")
def c_lin():
    return st.make_named_state("c_lin")


@pytest.fixture(scope="session")
def c_lin_group(c_lin):
    return state_stabilizer(c_lin)


@pytest.fixture(scope="session")
def ghz3_group():
    return state_stabilizer(st.ghz(3))


@pytest.fixture(scope="session")
def ghz4_group():
    return state_stabilizer(st.ghz(4))


# one line per acceptance criterion, printed after the run
ACCEPTANCE_RESULTS: dict[int, str] = {}


def record_criterion(number: int, title: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS[number] = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}: {title} ({detail})"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[k])
