import pytest

from atlbisim import threeballot as T


@pytest.fixture(scope="session")
def tb22():
    """The (2 voters, 2 candidates) models, built once per session and on demand."""
    cache = {}

    def get(variant):
        if variant not in cache:
            cache[variant] = T.build(T.ThreeBallotConfig(2, 2, variant))
        return cache[variant]

    return get


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
