from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def demo_graph_text() -> str:
    return (FIXTURES / "nested_demo.graph.json").read_text(encoding="utf-8")


@pytest.fixture
def demo_graph(demo_graph_text):
    from archigraph.graph import parse_hier

    return parse_hier(demo_graph_text)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


class ScriptedTransport:
    """Test transport that replays a fixed list of responses in order."""

    kind = "mock"

    def __init__(self, responses):
        self.responses = list(responses)
        self.requests = []

    def send(self, request):
        self.requests.append(request)
        if not self.responses:
            raise AssertionError("scripted transport exhausted")
        return self.responses.pop(0)


class FailingTransport:
    """Fails ``failures`` times with TransportError, then succeeds."""

    kind = "mock"

    def __init__(self, failures, reply="ok"):
        from archigraph.agents import TransportError

        self._error = TransportError
        self.failures = failures
        self.reply = reply
        self.attempts = 0

    def send(self, request):
        self.attempts += 1
        if self.attempts <= self.failures:
            raise self._error("injected failure")
        return self.reply


@pytest.fixture
def scripted_transport():
    return ScriptedTransport


@pytest.fixture
def failing_transport():
    return FailingTransport
