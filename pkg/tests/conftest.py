import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_rank_matrix(rng, n, r):
    """n x n matrix of exact rank r: full-rank factors around a rank-r diagonal core."""
    core = np.zeros(n)
    core[:r] = rng.uniform(0.5, 2.0, size=r)
    P = rng.standard_normal((n, n)) + n * np.eye(n)
    Q = rng.standard_normal((n, n)) + n * np.eye(n)
    return P @ np.diag(core) @ Q


# one line per acceptance criterion, echoed again at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
