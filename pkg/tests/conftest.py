import numpy as np
import pytest

from semipert import Generator, LpElement, MeasureSpace
from semipert.estimates import EstimateInstance


def random_metzler(rng, n, density=0.7, diag_shift=1.0):
    off = ~np.eye(n, dtype=bool)
    g = rng.uniform(0, 1, (n, n)) * (rng.random((n, n)) < density) * off
    np.fill_diagonal(g, -g.sum(axis=1) - rng.uniform(0, diag_shift, n))
    return g


def taylor_expm(a, terms=80):
    """Series oracle with scaling and squaring, independent of scipy."""
    s = max(0, int(np.ceil(np.log2(max(np.abs(a).sum(axis=1).max(), 1e-300)))) + 1)
    b = a / 2**s
    out = np.eye(len(a))
    term = np.eye(len(a))
    for k in range(1, terms):
        term = term @ b / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


@pytest.fixture
def space2():
    return MeasureSpace([1.0, 1.0])


@pytest.fixture
def inst2(space2):
    """The symmetric 2x2 instance whose minimal constant is 0.5."""
    gs = Generator([[-1, 1], [1, -1]], space2)
    gt = Generator([[-1, 1.5], [1.5, -1]], space2)
    one = LpElement([1, 1], 2, space2, nonneg=True)
    return EstimateInstance(gs, gt, one, one, C=0.5)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion for the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
