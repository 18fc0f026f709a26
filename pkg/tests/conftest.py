import numpy as np
import pytest

from sweepout.constants import assemble_constants
from sweepout.surface import flat_torus, genus_two, icosphere


@pytest.fixture(scope="session")
def torus():
    return flat_torus(40)


@pytest.fixture(scope="session")
def small_torus():
    return flat_torus(12)


@pytest.fixture(scope="session")
def sphere():
    return icosphere(3)


@pytest.fixture(scope="session")
def genus2():
    return genus_two(30)


@pytest.fixture(scope="session")
def paper2():
    return assemble_constants(n=2, K=1.0, c=1.0, mode="paper")


@pytest.fixture
def rng():
    return np.random.default_rng(0)


VERDICTS = []


@pytest.fixture
def verdict(request):
    """Record and print one pass/fail line for an acceptance criterion."""
    tr = request.config.pluginmanager.get_plugin("terminalreporter")

    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
        VERDICTS.append(line)
        if tr is not None:
            tr.write_line("")
            tr.write_line(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(VERDICTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
