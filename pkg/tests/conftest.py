"""Shared random-path corpora and hypothesis strategies."""

import numpy as np
import pytest
from hypothesis import strategies as st

from bdspectra import WeightedPath


def random_path(rng, n, decades=6.0):
    """``pi`` and ``nu`` log-uniform over ``decades``, ``pi`` normalized and
    ``nu`` rescaled so the largest generator diagonal is 1."""
    pi = 10.0 ** rng.uniform(-decades, 0.0, n)
    pi /= pi.sum()
    nu = 10.0 ** rng.uniform(-decades, 0.0, n - 1)
    p = WeightedPath(pi, nu)
    return p.scaled(1.0 / p.diagonal().max())


def corpus(seed, count, n_max, decades=6.0, n_min=2):
    rng = np.random.default_rng(seed)
    return [random_path(rng, int(rng.integers(n_min, n_max + 1)), decades) for _ in range(count)]


@st.composite
def paths(draw, n_min=2, n_max=25, decades=2.0):
    n = draw(st.integers(n_min, n_max))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_path(np.random.default_rng(seed), n, decades)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion at the end of the session
_CRITERIA = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rpartition("::")[2]
    if "test_acceptance.py" in report.nodeid and name.startswith("test_criterion_"):
        if report.when == "call" or report.outcome != "passed":
            _CRITERIA.setdefault(name, report.outcome)
            if report.outcome != "passed":
                _CRITERIA[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA):
        num, _, label = name[len("test_criterion_"):].partition("_")
        status = "PASS" if _CRITERIA[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {int(num):2d} {status}  {label.replace('_', ' ')}")
