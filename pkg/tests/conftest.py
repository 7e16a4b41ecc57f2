import numpy as np
import pytest

from blsnav import fixtures as fx
from oracles import linear_net

_acceptance = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None or call.when != "call":
        return
    number, title = marker.args
    ok = call.excinfo is None
    prev = _acceptance.get(number, (title, True))
    _acceptance[number] = (title, prev[1] and ok)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        title, ok = _acceptance[number]
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def identity_net():
    return linear_net(np.eye(4))


@pytest.fixture(scope="session")
def default_net():
    return fx.gen_mapping_network(fx.FixtureConfig())


@pytest.fixture(scope="session")
def tanh_net():
    return fx.gen_mapping_network(fx.FixtureConfig(activation="tanh", seed=3))
