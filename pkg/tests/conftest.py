import numpy as np
import pytest

_verdicts = pytest.StashKey[dict]()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion(request):
    """Record and print one PASS/FAIL line per acceptance criterion."""
    table = request.config.stash.setdefault(_verdicts, {})

    def report(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        table[number] = line
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter, config):
    table = config.stash.get(_verdicts, {})
    if table:
        terminalreporter.section("acceptance criteria")
        for number in sorted(table):
            terminalreporter.write_line(table[number])
