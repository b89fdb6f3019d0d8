import pytest

from toeplitz_wells.asymptotics import cached_cluster_basis
from toeplitz_wells.torus import build_field


@pytest.fixture(scope="session")
def constant_field():
    return build_field("constant")


@pytest.fixture(scope="session")
def constant_basis(constant_field):
    """``constant_basis(p)``: cluster basis on the constant field, shared across the session."""

    def get(p):
        return cached_cluster_basis(constant_field, p)

    return get


ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = {}


@pytest.fixture
def criterion(request):
    """``criterion(number, title, passed, detail)`` records one acceptance line."""

    def record(number, title, passed, detail):
        request.config.stash[ACCEPTANCE][number] = (title, bool(passed), detail)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(ACCEPTANCE, {})
    if not results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(results):
        title, passed, detail = results[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  [{number:>2}] {title}: {detail}")
