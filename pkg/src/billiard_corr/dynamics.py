"""Event-driven dynamics of equal-mass hard disks in a rectangular box.

Disks fly freely between events.  Disk-disk contacts exchange the normal
component of the relative velocity, cushions reflect specularly.  Contact
times are solved in closed form, so there is no integration step.

The public functions here are thin, validated wrappers around the compiled
primitives in :mod:`billiard_corr._kernels`; the ensemble runner calls those
same primitives, so a trajectory does not depend on which entry point
produced it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import NamedTuple, Optional

import numpy as np

from . import _kernels as K
from .exceptions import ConsistencyError, ContractError

CONTACT_TOL = K.CONTACT_TOL


class Vec2(NamedTuple):
    x: float
    y: float

    def __add__(self, other):
        return Vec2(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Vec2(self.x - other[0], self.y - other[1])

    def dot(self, other) -> float:
        return self.x * other[0] + self.y * other[1]

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


class Wall(IntEnum):
    LEFT = K.WALL_LEFT
    RIGHT = K.WALL_RIGHT
    BOTTOM = K.WALL_BOTTOM
    TOP = K.WALL_TOP


def _as_vec(v) -> Vec2:
    v = Vec2(float(v[0]), float(v[1]))
    if not (math.isfinite(v.x) and math.isfinite(v.y)):
        raise ContractError(f"non-finite vector {tuple(v)}")
    return v


@dataclass(frozen=True)
class Disk:
    id: int
    center: Vec2
    velocity: Vec2
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _as_vec(self.center))
        object.__setattr__(self, "velocity", _as_vec(self.velocity))
        if not self.radius > 0:
            raise ContractError(f"disk {self.id}: radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class TableGeometry:
    width: float
    height: float

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ContractError(f"table dimensions must be positive, got {self.width}x{self.height}")

    def contains(self, disk: Disk, tol: float = CONTACT_TOL) -> bool:
        x, y = disk.center
        r = disk.radius
        return (r - tol <= x <= self.width - r + tol
                and r - tol <= y <= self.height - r + tol)


@dataclass(frozen=True)
class CollisionEvent:
    """A processed event.  ``j`` is set for disk-disk, ``wall`` for disk-wall."""

    time: float
    kind: str
    i: int
    j: Optional[int] = None
    wall: Optional[Wall] = None


@dataclass(frozen=True)
class TableState:
    time: float
    disks: tuple
    collision_count: int = 0

    def __post_init__(self):
        object.__setattr__(self, "disks", tuple(self.disks))

    @property
    def radii(self) -> np.ndarray:
        return np.array([d.radius for d in self.disks], dtype=np.float64)

    def to_arrays(self):
        """Return ``(pos, vel, radii)`` as fresh float64 arrays."""
        pos = np.array([d.center for d in self.disks], dtype=np.float64).reshape(-1, 2)
        vel = np.array([d.velocity for d in self.disks], dtype=np.float64).reshape(-1, 2)
        return pos, vel, self.radii

    def with_arrays(self, pos, vel, time, collision_count) -> "TableState":
        disks = tuple(
            Disk(d.id, Vec2(float(p[0]), float(p[1])), Vec2(float(v[0]), float(v[1])), d.radius)
            for d, p, v in zip(self.disks, pos, vel)
        )
        return TableState(float(time), disks, int(collision_count))

    def kinetic_energy(self) -> float:
        # unit masses; the factor 1/2 is dropped
        return math.fsum(d.velocity.x ** 2 + d.velocity.y ** 2 for d in self.disks)

    def momentum(self) -> Vec2:
        return Vec2(math.fsum(d.velocity.x for d in self.disks),
                    math.fsum(d.velocity.y for d in self.disks))

    def min_gap(self) -> float:
        """Smallest surface separation over all pairs (``inf`` for < 2 disks)."""
        gap = math.inf
        ds = self.disks
        for a in range(len(ds)):
            for b in range(a + 1, len(ds)):
                g = (ds[a].center - ds[b].center).norm() - ds[a].radius - ds[b].radius
                gap = min(gap, g)
        return gap

    def validate(self, geom: TableGeometry) -> None:
        for d in self.disks:
            if not geom.contains(d):
                raise ContractError(f"disk {d.id} at {tuple(d.center)} is outside the table")
        ds = self.disks
        for a in range(len(ds)):
            for b in range(a + 1, len(ds)):
                g = (ds[a].center - ds[b].center).norm() - ds[a].radius - ds[b].radius
                if g < -CONTACT_TOL:
                    raise ContractError(f"disks {ds[a].id} and {ds[b].id} overlap by {-g:.3g}")


def resolve_disk_collision(d1: Disk, d2: Disk) -> tuple:
    """Velocities of two touching, approaching disks after an elastic hit.

    Only the velocity component along the line of centres changes; for equal
    masses it is exchanged between the two disks.
    """
    sep = d1.center - d2.center
    dist = sep.norm()
    sigma = d1.radius + d2.radius
    if abs(dist - sigma) > CONTACT_TOL:
        raise ContractError(
            f"disks {d1.id} and {d2.id} are not in contact (distance {dist!r}, contact {sigma!r})")
    if (d1.velocity - d2.velocity).dot(sep) >= 0:
        raise ContractError(f"disks {d1.id} and {d2.id} are not approaching")
    v1x, v1y, v2x, v2y = K.collide(d1.center.x, d1.center.y, d1.velocity.x, d1.velocity.y,
                                   d2.center.x, d2.center.y, d2.velocity.x, d2.velocity.y)
    return Vec2(v1x, v1y), Vec2(v2x, v2y)


def time_to_disk_contact(d1: Disk, d2: Disk) -> Optional[float]:
    """Delay until ``d1`` and ``d2`` touch while approaching, or ``None``."""
    t = K.pair_time(d1.center.x, d1.center.y, d1.velocity.x, d1.velocity.y,
                    d2.center.x, d2.center.y, d2.velocity.x, d2.velocity.y,
                    d1.radius + d2.radius)
    return None if math.isinf(t) else t


def time_to_wall_contact(d: Disk, geom: TableGeometry) -> Optional[tuple]:
    """Delay and wall of the next cushion hit, or ``None`` for a resting disk.

    Simultaneous hits on two walls resolve in the order left, right, bottom,
    top.
    """
    t, w = K.wall_time(d.center.x, d.center.y, d.velocity.x, d.velocity.y,
                       d.radius, geom.width, geom.height)
    if w < 0:
        return None
    return t, Wall(w)


def reflect_off_wall(v, wall) -> Vec2:
    v = _as_vec(v)
    wall = Wall(wall)
    normal = v.x if wall in (Wall.LEFT, Wall.RIGHT) else v.y
    if normal == 0:
        raise ContractError(f"velocity {tuple(v)} has no component toward the {wall.name.lower()} wall")
    return Vec2(*K.reflect(v.x, v.y, int(wall)))


_STATUS_TEXT = {
    K.STATUS_OVERLAP: "disks overlap beyond tolerance after an event",
    K.STATUS_ESCAPE: "a disk left the table after an event",
    K.STATUS_NONFINITE: "non-finite disk position",
    K.STATUS_MAX_EVENTS: "event budget exhausted",
}


def step_to_next_event(state: TableState, geom: TableGeometry, horizon: float):
    """Advance ``state`` to its next collision, or to ``horizon`` if none comes first.

    Returns ``(new_state, event)`` with ``event=None`` when the horizon was
    reached.  Events closer than 1e-9 in time are taken one at a time:
    disk-disk before disk-wall, lower indices first, then wall order.
    """
    if state.time > horizon:
        raise ContractError(f"state time {state.time} is past the horizon {horizon}")
    pos, vel, radii = state.to_arrays()
    t, kind, i, j, status = K.step(pos, vel, radii, float(geom.width), float(geom.height),
                                   float(state.time), float(horizon))
    if status != K.STATUS_OK:
        raise ConsistencyError(f"{_STATUS_TEXT[status]} at t={t!r} (event {kind}, {i}, {j})")
    if kind == K.KIND_NONE:
        return state.with_arrays(pos, vel, t, state.collision_count), None
    new = state.with_arrays(pos, vel, t, state.collision_count + 1)
    ids = [d.id for d in state.disks]
    if kind == K.KIND_PAIR:
        event = CollisionEvent(t, "disk-disk", ids[i], ids[j])
    else:
        event = CollisionEvent(t, "disk-wall", ids[i], wall=Wall(j))
    return new, event


def simulate(state: TableState, geom: TableGeometry, horizon: float):
    """Yield ``(state, event)`` after every event up to ``horizon``.

    The last item has ``event=None`` and ``state.time == horizon``.
    """
    while True:
        state, event = step_to_next_event(state, geom, horizon)
        yield state, event
        if event is None:
            return


def positions_at(state: TableState, geom: TableGeometry, times) -> np.ndarray:
    """Disk centres at each of the sorted ``times``, shape ``(len(times), n, 2)``."""
    times = np.asarray(times, dtype=np.float64)
    if times.size and (np.any(np.diff(times) < 0) or times[0] < state.time):
        raise ContractError("sample times must be sorted and not before the state time")
    pos, vel, radii = state.to_arrays()
    w, h = float(geom.width), float(geom.height)
    t = float(state.time)
    out = np.empty((times.size, pos.shape[0], 2))
    for k, target in enumerate(times):
        while t < target:
            t, kind, i, j, status = K.step(pos, vel, radii, w, h, t, float(target))
            if status != K.STATUS_OK:
                raise ConsistencyError(f"{_STATUS_TEXT[status]} at t={t!r}")
        out[k] = pos
    return out
