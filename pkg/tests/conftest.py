from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from hollm.core import History, SearchSpace

FIXTURES = Path(__file__).parent / "fixtures"

# filled by test_acceptance, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def unit_square() -> SearchSpace:
    return SearchSpace.box(0.0, 1.0, 2)


def make_history(space: SearchSpace, points, values=None) -> History:
    h = History(space)
    pts = np.asarray(points, dtype=float)
    if values is None:
        values = np.zeros(len(pts))
    for p, v in zip(pts, values):
        h.add(p, v)
    return h


@pytest.fixture(autouse=True)
def _no_network(monkeypatch):
    """The suite must never reach a real endpoint."""
    import httpx

    def refuse(*args, **kwargs):
        raise AssertionError("network access attempted during tests")

    monkeypatch.setattr(httpx.HTTPTransport, "handle_request", refuse)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
