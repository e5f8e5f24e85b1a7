import pytest

from triq.state import basis_state, ghz, make_rng, random_local_unitary, random_state, w_state

ACCEPTANCE_LINES = []


@pytest.fixture
def ghz_state():
    return ghz()


@pytest.fixture
def w():
    return w_state()


@pytest.fixture
def zero_state():
    return basis_state(0, 0, 0)


def seeded_states(seed, n):
    return [random_state(make_rng(seed, i)) for i in range(n)]


def random_lu(rng):
    """Haar unitaries on all three qubits, returned as a list of LocalUnitary."""
    return [random_local_unitary(rng, q) for q in "ABC"]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
