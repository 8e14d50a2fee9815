import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[2]))

from vortexforge.packages.events import EventEmitter, set_emitter  # noqa: E402
from vortexforge.packages.graph import generate_graph  # noqa: E402


@pytest.fixture(autouse=True)
def captured_events():
    """Fresh listener-only emitter per test; yields the list of emitted events."""
    events = []
    emitter = EventEmitter()
    emitter.add_listener(events.append)
    set_emitter(emitter)
    yield events


@pytest.fixture
def k2():
    return generate_graph("complete", n=2)


@pytest.fixture
def k3():
    return generate_graph("complete", n=3)


@pytest.fixture
def torus44():
    return generate_graph("torus", m=4, k=4)


@pytest.fixture
def cycle8():
    return generate_graph("cycle", n=8)
