import numpy as np
import pytest

from billiard_corr.dynamics import Disk, TableGeometry, TableState
from billiard_corr.scenario import (
    DiskSpec,
    Rect,
    RegionEvent,
    ScalarDistribution,
    ScenarioConfig,
    builtin_scenario,
)

P = ScalarDistribution.point
U = ScalarDistribution.uniform


@pytest.fixture
def table():
    return TableGeometry(600.0, 300.0)


@pytest.fixture(scope="session")
def basic():
    return builtin_scenario("basic")


def make_state(*disks, time=0.0):
    """Build a TableState from ``(x, y, vx, vy[, r])`` tuples."""
    out = []
    for k, d in enumerate(disks):
        x, y, vx, vy, *rest = d
        out.append(Disk(k, (x, y), (vx, vy), rest[0] if rest else 20.0))
    return TableState(time, out, 0)


def lone_disk_config(x=300.0, y=150.0, vx=20.0, vy=0.0, events=None, horizon=50.0):
    """One moving disk plus a parked one in the corner, for region tests."""
    disks = [
        DiskSpec(0, 20.0, P(x), P(y), P(vx), P(vy)),
        DiskSpec(1, 20.0, P(560.0), P(20.0), P(0.0), P(0.0)),
    ]
    if events is None:
        events = [RegionEvent("a", 0, Rect(290, 160, 310, 140), (0.0, horizon)),
                  RegionEvent("b", 0, Rect(0, 300, 30, 270), (0.0, horizon))]
    return ScenarioConfig(TableGeometry(600.0, 300.0), disks, events, horizon)


def random_bernoulli_pairs(rng, n, p1, p2, p12):
    """``(n, 2)`` bool outcomes with the given joint law."""
    cells = np.array([p12, p1 - p12, p2 - p12, 1.0 - p1 - p2 + p12])
    c = rng.choice(4, size=n, p=cells)
    return np.column_stack([(c == 0) | (c == 1), (c == 0) | (c == 2)])
