import math

import numpy as np
import pytest

from lgot.geometry import ArcPiece, BoundaryCurve, Point2
from lgot.pipeline import run
from lgot.scenarios import builtin
from lgot.trace import SignedBoundaryMeasure, trace_from_breakpoints


@pytest.fixture(scope="session")
def unit_square():
    return BoundaryCurve.polygon([(0, 0), (1, 0), (1, 1), (0, 1)])


@pytest.fixture(scope="session")
def unit_circle():
    return BoundaryCurve([ArcPiece(Point2(0, 0), 1.0, 0.0, math.pi),
                          ArcPiece(Point2(0, 0), 1.0, math.pi, math.pi)])


@pytest.fixture(scope="session")
def constant_square(unit_square):
    g = trace_from_breakpoints(unit_square, [(0.0, 1.0), (2.0, 1.0)])
    return unit_square, SignedBoundaryMeasure(g)


@pytest.fixture(scope="session")
def delta25():
    return builtin("delta_square", delta=0.25)


@pytest.fixture(scope="session")
def disk():
    return builtin("disk_cosine")


_RUNS = {}


def cached_run(name, oracle=True, **params):
    key = (name, oracle, tuple(sorted(params.items())))
    if key not in _RUNS:
        _RUNS[key] = run(builtin(name, **params), oracle=oracle)
    return _RUNS[key]


@pytest.fixture(scope="session")
def runs():
    return cached_run


def rng(seed=0):
    return np.random.default_rng(seed)


_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(n, title, checks, seconds)``."""

    def record(n, title, checks, seconds=None):
        ok = all(bool(v) for v, _ in checks.values())
        detail = "; ".join(f"{k}={d}" for k, (_, d) in checks.items())
        t = "" if seconds is None else f" [{seconds:.1f}s]"
        _ACCEPTANCE.append((n, f"criterion {n} {'PASS' if ok else 'FAIL'}: {title}{t} :: {detail}"))
        failed = [k for k, (v, _) in checks.items() if not v]
        assert not failed, f"criterion {n} failed checks: {failed}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)
