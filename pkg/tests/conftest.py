import numpy as np
import pytest

import platoon_risk as pr

# one line per acceptance criterion, printed at the end of the run
_acceptance_log: list[tuple[str, bool, str]] = []


@pytest.fixture
def record_acceptance():
    def _record(criterion: str, ok: bool, detail: str = ""):
        _acceptance_log.append((criterion, ok, detail))

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_log:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in _acceptance_log:
        status = "PASS" if ok else "FAIL"
        line = f"{status}  {criterion}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def default_f_bounds():
    # ~18 s at the default grid; cached for the whole session
    return pr.f_bounds()


@pytest.fixture(scope="session")
def params20_complete():
    return pr.PlatoonParams(n=20, tau=0.04, beta=1.0, r=2.0, c=1.1, epsilon=0.1, g=10.0)


@pytest.fixture(scope="session")
def complete20_law(params20_complete):
    return pr.special_graph_covariance("complete", params20_complete)


@pytest.fixture(scope="session")
def path20_law():
    params = pr.PlatoonParams(n=20, tau=0.04, beta=1.0, r=2.0, c=1.1, epsilon=0.1, g=0.1)
    spectrum = pr.graph_spectrum(pr.path_graph(20))
    return pr.distance_covariance(spectrum, params)


def random_connected_graph(rng: np.random.Generator, n: int, extra_edge_prob: float = 0.5):
    """Random spanning tree plus extra weighted edges; always connected."""
    edges = []
    order = rng.permutation(n) + 1
    for k in range(1, n):
        attach = order[rng.integers(0, k)]
        edges.append((int(order[k]), int(attach), float(rng.uniform(0.5, 1.5))))
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if rng.random() < extra_edge_prob:
                edges.append((i, j, float(rng.uniform(0.5, 1.5))))
    dedup = {}
    for i, j, w in edges:
        dedup[(min(i, j), max(i, j))] = w
    return pr.custom_graph(n, [(i, j, w) for (i, j), w in dedup.items()])
