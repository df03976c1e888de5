import numpy as np
import pytest

from irsmec.channel import GeometryConfig, realize_trial, trial_rng
from irsmec.model import Device, SystemParams

_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line per acceptance criterion."""
    def _report(name, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  [{detail}]" if detail else "")
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def params():
    return SystemParams()


@pytest.fixture
def geometry():
    return GeometryConfig()


def scenario(seed, k=10, n=60, q=5, energy_j=0.01, cycles=1000.0, f_max=None, trial=0):
    """Default-geometry scenario with K homogeneous devices."""
    p = SystemParams(n_elements=n, q_budget=q)
    kw = {} if f_max is None else {"f_max_hz": f_max}
    devs = [Device(energy_j, cycles, **kw) for _ in range(k)]
    placed, ch = realize_trial(p, GeometryConfig(), devs, trial_rng(seed, trial))
    return p, placed, ch


@pytest.fixture
def make_scenario():
    return scenario
