import numpy as np
import pytest
from scipy.spatial.distance import cdist

from mqrank.ranking import DissimilarityStack
from mqrank.solvers import MultiQueryTask, QueryTask


def random_stack(rng, n, J=2, dim=3):
    """Euclidean distance layers between independent random point clouds."""
    layers = []
    for _ in range(J):
        pts = rng.standard_normal((n, dim))
        D = cdist(pts, pts)
        np.fill_diagonal(D, 0.0)
        layers.append(D)
    return DissimilarityStack.from_matrices(layers)


def random_task(rng, n, K=1, size_s=3):
    queries = rng.choice(n, size=K, replace=False)
    tasks = []
    for q in queries:
        others = np.setdiff1d(np.arange(n), [q])
        S = rng.choice(others, size=size_s, replace=False)
        tasks.append(QueryTask(int(q), tuple(int(s) for s in S)))
    return MultiQueryTask(tuple(tasks))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion."""

    def record(label, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
