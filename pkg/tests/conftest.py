import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from aeronet_ctr.kinematics import AngularVelocity, OrbitSpec  # noqa: E402
from aeronet_ctr.scenario import Area, Scenario  # noqa: E402

# criterion number -> (description, outcome); filled by the acceptance tests
ACCEPTANCE: dict = {}


def record(number, description, passed, detail=""):
    ACCEPTANCE[number] = (description, passed, detail)


@pytest.fixture
def rigid_pair():
    """Two co-rotating nodes 40 mi apart: same radius, phase and rate."""
    w = AngularVelocity.exact(20)
    a = OrbitSpec((0.0, 0.0), 10.0, 30.0, w)
    b = OrbitSpec((40.0, 0.0), 10.0, 30.0, w)
    return Scenario((a, b), Area(100.0, 100.0))


@pytest.fixture
def two_orbit():
    """Two orbits with polar centers (15, pi/3) and (27, pi/6)."""
    import math

    w = AngularVelocity.exact(20)
    ci = (15 * math.cos(math.pi / 3), 15 * math.sin(math.pi / 3))
    cj = (27 * math.cos(math.pi / 6), 27 * math.sin(math.pi / 6))
    a = OrbitSpec(ci, 10.0, 0.0, w)
    b = OrbitSpec(cj, 10.0, 90.0, w)
    return Scenario((a, b), Area(60.0, 60.0))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        desc, ok, detail = ACCEPTANCE[k]
        line = f"[{'PASS' if ok else 'FAIL'}] {k:>2}. {desc}"
        if detail:
            line += f"  ({detail})"
        tr.write_line(line)
