import re

import numpy as np
import pytest

from hermpower.matrix import gen_random_stable, one_norm

_CRITERIA: dict[int, list[str]] = {}
_CRITERION_RE = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def unit_vector(rng, n, complex_=True):
    x = rng.standard_normal(n)
    if complex_:
        x = x + 1j * rng.standard_normal(n)
    return x / np.linalg.norm(x)


def contraction(n, d, seed, rho=0.9):
    """Random Hermitian matrix rescaled to ``||A||_1 = 1`` (hence also stable)."""
    a = gen_random_stable(n, d, rho, seed)
    return a.scaled(one_norm(a))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_runtest_logreport(report):
    m = _CRITERION_RE.search(report.nodeid)
    if not m:
        return
    k = int(m.group(1))
    if report.when == "call" or report.outcome != "passed":
        _CRITERIA.setdefault(k, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        ok = all(o == "passed" for o in _CRITERIA[k])
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}")
