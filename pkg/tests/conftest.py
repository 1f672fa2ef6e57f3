import pytest

from qpcover.fixtures import load_cover, load_qp

COVERS = ["kronecker-cover2", "liegrass-cover2", "loopwrap", "torus1p-cover3"]


@pytest.fixture(scope="session")
def covers():
    return {name: load_cover(name) for name in COVERS}


@pytest.fixture(scope="session")
def kron(covers):
    return covers["kronecker-cover2"]


@pytest.fixture(scope="session")
def torus(covers):
    return covers["torus1p-cover3"]


@pytest.fixture(scope="session")
def markov():
    return load_qp("markov")


def pytest_configure(config):
    config.acceptance_results = {}


def pytest_terminal_summary(terminalreporter, config):
    results = config.acceptance_results
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])


@pytest.fixture
def acceptance(request):
    """Run a criterion, record one PASS/FAIL line for the summary and fail the test on FAIL."""
    from test_acceptance import run_criterion

    def check(number):
        ok, line = run_criterion(number)
        request.config.acceptance_results[number] = line
        assert ok, line

    return check
