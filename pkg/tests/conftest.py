import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_weights(rng, n_max):
    w = rng.random(n_max + 1)
    return w / w.sum()


_CRITERIA = []


@pytest.fixture
def criterion(capsys):
    """Record and print a one-line PASS/FAIL verdict for an acceptance criterion."""

    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {detail}"
        _CRITERIA.append(line)
        with capsys.disabled():
            print(f"\n{line}", flush=True)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
