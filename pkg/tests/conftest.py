import numpy as np
import pytest

from hardy_spectral.geometry import CORPUS, Ball, Box, Domain, corpus_domain


@pytest.fixture(scope="session")
def corpus():
    return {name: corpus_domain(name) for name in CORPUS}


@pytest.fixture(scope="session")
def interval():
    return Domain(Box([(0, 1)]))


@pytest.fixture(scope="session")
def square():
    return Domain(Box([(0, 1), (0, 1)]))


@pytest.fixture(scope="session")
def disk():
    return Domain(Ball((0, 0), 1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_interior_points(dom, n, rng):
    """Rejection-sample n points of dom from its bbox."""
    out = []
    while sum(len(o) for o in out) < n:
        pts = dom.bbox[:, 0] + rng.random((4 * n, dom.dim)) * dom.lengths
        out.append(pts[dom.contains(pts)])
    return np.concatenate(out)[:n]


def random_directions(d, n, rng):
    g = rng.standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """record(criterion, ok, detail): one summary line per acceptance criterion."""

    def record(criterion, ok, detail):
        _ACCEPTANCE.append((criterion, bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}")
