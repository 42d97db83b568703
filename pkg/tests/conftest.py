import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("lab", max_examples=40, deadline=None)
settings.load_profile("lab")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def tree_from_prufer(code, lengths):
    """Labelled tree on len(code)+2 vertices from a Prüfer sequence."""
    n = len(code) + 2
    code = [c % n for c in code]
    degree = [1] * n
    for c in code:
        degree[c] += 1
    edges = []
    for c in code:
        leaf = min(i for i in range(n) if degree[i] == 1)
        edges.append((str(leaf), str(c)))
        degree[leaf] -= 1
        degree[c] -= 1
    u, v = [i for i in range(n) if degree[i] == 1]
    edges.append((str(u), str(v)))
    return [(a, b, float(w)) for (a, b), w in zip(edges, lengths)]


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one line per acceptance criterion; printed in the terminal summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE, [])

    def record(label: str, ok: bool, detail: str, seconds: float):
        line = f"{'PASS' if ok else 'FAIL'}  {label:<4} {seconds:7.2f}s  {detail}"
        lines.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for ln in lines:
            terminalreporter.write_line(ln)
