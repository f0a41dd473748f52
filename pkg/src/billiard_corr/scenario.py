"""Experiment configurations: table, disks, initial-value laws, region events.

A :class:`ScenarioConfig` is immutable once built and validated.  The first
disk is the cue ball (``speed_multiplier`` scales its sampled velocity); the
first two region events are the pair whose correlation is reported.

Config files are JSON documents::

    {"geometry": {"width": 600, "height": 300},
     "disks": [{"id": 0, "radius": 20, "x0": 200, "y0": [152, 158],
                "vx0": 20, "vy0": 0}, ...],
     "events": [{"name": "green", "disk_id": 0,
                 "rect": [150, 270, 240, 180], "window": [0, 500]}, ...],
     "horizon": 500, "sample_tick": 0.1, "brownian": false,
     "speed_multiplier": 1}

A bare number is a fixed value, ``[lo, hi]`` is uniform on that interval.
Rectangles are ``[x1, y1, x2, y2]`` with ``(x1, y1)`` the upper-left corner.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import Disk, TableGeometry, TableState, Vec2
from .exceptions import ConfigError, PackingError
from .rng import RandomStream

MAX_PLACEMENT_ATTEMPTS = 10**6


@dataclass(frozen=True)
class ScalarDistribution:
    lo: float
    hi: float
    kind: str = "uniform"

    @classmethod
    def point(cls, value) -> "ScalarDistribution":
        return cls(float(value), float(value), "point")

    @classmethod
    def uniform(cls, lo, hi) -> "ScalarDistribution":
        if not lo <= hi:
            raise ConfigError(f"uniform distribution needs lo <= hi, got [{lo}, {hi}]")
        return cls(float(lo), float(hi), "uniform")

    @property
    def is_point(self) -> bool:
        return self.kind == "point"

    def sample(self, gen: np.random.Generator) -> float:
        if self.is_point:
            return self.lo
        return float(gen.uniform(self.lo, self.hi))

    def to_json(self):
        return _num(self.lo) if self.is_point else [_num(self.lo), _num(self.hi)]

    @classmethod
    def from_json(cls, value, where: str) -> "ScalarDistribution":
        if _is_number(value):
            return cls.point(value)
        if isinstance(value, list) and len(value) == 2 and all(_is_number(v) for v in value):
            try:
                return cls.uniform(*value)
            except ConfigError as exc:
                raise ConfigError(f"{where}: {exc}") from None
        raise ConfigError(f"{where}: expected a number or a [lo, hi] pair, got {value!r}")


@dataclass(frozen=True)
class DiskSpec:
    id: int
    radius: float
    x0: ScalarDistribution
    y0: ScalarDistribution
    vx0: ScalarDistribution
    vy0: ScalarDistribution


@dataclass(frozen=True)
class Rect:
    """Closed rectangle with upper-left ``(x1, y1)`` and lower-right ``(x2, y2)``."""

    x1: float
    y1: float
    x2: float
    y2: float

    @property
    def bounds(self) -> tuple:
        """``(xmin, ymin, xmax, ymax)``."""
        return (self.x1, self.y2, self.x2, self.y1)

    def contains(self, p) -> bool:
        return self.x1 <= p[0] <= self.x2 and self.y2 <= p[1] <= self.y1


@dataclass(frozen=True)
class RegionEvent:
    name: str
    disk_id: int
    region: Rect
    window: tuple


@dataclass(frozen=True)
class ScenarioConfig:
    geometry: TableGeometry
    disks: tuple
    events: tuple
    horizon: float
    sample_tick: float = 0.1
    brownian: bool = False
    speed_multiplier: float = 1.0
    name: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "disks", tuple(self.disks))
        object.__setattr__(self, "events", tuple(self.events))
        validate_config(self)

    def disk_index(self, disk_id) -> int:
        for k, d in enumerate(self.disks):
            if d.id == disk_id:
                return k
        raise KeyError(disk_id)

    def to_dict(self) -> dict:
        return {
            "geometry": {"width": _num(self.geometry.width), "height": _num(self.geometry.height)},
            "disks": [
                {"id": d.id, "radius": _num(d.radius), "x0": d.x0.to_json(), "y0": d.y0.to_json(),
                 "vx0": d.vx0.to_json(), "vy0": d.vy0.to_json()}
                for d in self.disks
            ],
            "events": [
                {"name": e.name, "disk_id": e.disk_id,
                 "rect": [_num(e.region.x1), _num(e.region.y1), _num(e.region.x2), _num(e.region.y2)],
                 "window": [_num(e.window[0]), _num(e.window[1])]}
                for e in self.events
            ],
            "horizon": _num(self.horizon),
            "sample_tick": _num(self.sample_tick),
            "brownian": self.brownian,
            "speed_multiplier": _num(self.speed_multiplier),
        }

    def to_json(self, indent=2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _num(v):
    v = float(v)
    return int(v) if v.is_integer() and abs(v) < 2**53 else v


def validate_config(cfg: ScenarioConfig) -> None:
    """Raise :class:`ConfigError` naming the first violated invariant."""
    geom = cfg.geometry
    if not cfg.disks:
        raise ConfigError("scenario needs at least one disk")
    ids = [d.id for d in cfg.disks]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"disk ids must be unique, got {ids}")
    for d in cfg.disks:
        if not (d.radius > 0 and math.isfinite(d.radius)):
            raise ConfigError(f"disk {d.id}: radius must be positive, got {d.radius}")
        if 2 * d.radius > geom.width or 2 * d.radius > geom.height:
            raise ConfigError(f"disk {d.id}: radius {d.radius} does not fit the table")
        for axis, dist, extent in (("x0", d.x0, geom.width), ("y0", d.y0, geom.height)):
            if dist.lo < d.radius or dist.hi > extent - d.radius:
                raise ConfigError(
                    f"disk {d.id}: {axis} range [{dist.lo}, {dist.hi}] places the disk outside "
                    f"[{d.radius}, {extent - d.radius}]")
    fixed = [d for d in cfg.disks if d.x0.is_point and d.y0.is_point]
    for a in range(len(fixed)):
        for b in range(a + 1, len(fixed)):
            p, q = fixed[a], fixed[b]
            dist = math.hypot(p.x0.lo - q.x0.lo, p.y0.lo - q.y0.lo)
            if dist < p.radius + q.radius:
                raise ConfigError(f"disks {p.id} and {q.id} overlap at their initial positions")
    if cfg.brownian:
        for d in cfg.disks:
            if d.x0.is_point or d.y0.is_point:
                raise ConfigError(f"brownian scenario: disk {d.id} must have random x0 and y0")
    if not (cfg.horizon > 0 and math.isfinite(cfg.horizon)):
        raise ConfigError(f"horizon must be positive, got {cfg.horizon}")
    if not cfg.sample_tick > 0:
        raise ConfigError(f"sample_tick must be positive, got {cfg.sample_tick}")
    if not (cfg.speed_multiplier > 0 and math.isfinite(cfg.speed_multiplier)):
        raise ConfigError(f"speed_multiplier must be positive, got {cfg.speed_multiplier}")
    if len(cfg.events) < 2:
        raise ConfigError(f"scenario needs at least two region events, got {len(cfg.events)}")
    names = [e.name for e in cfg.events]
    if len(set(names)) != len(names):
        raise ConfigError(f"event names must be unique, got {names}")
    for e in cfg.events:
        if e.disk_id not in ids:
            raise ConfigError(f"event {e.name!r}: unknown disk_id {e.disk_id}")
        r = e.region
        if not (r.x1 < r.x2 and r.y1 > r.y2):
            raise ConfigError(f"event {e.name!r}: rect must be given as upper-left then lower-right corner")
        if r.x1 < 0 or r.x2 > geom.width or r.y2 < 0 or r.y1 > geom.height:
            raise ConfigError(f"event {e.name!r}: region lies outside the table")
        t0, t1 = e.window
        if not (0 <= t0 < t1 <= cfg.horizon):
            raise ConfigError(f"event {e.name!r}: window [{t0}, {t1}] must satisfy 0 <= start < end <= horizon")


_TOP_KEYS = {"geometry", "disks", "events", "horizon", "sample_tick", "brownian", "speed_multiplier"}
_REQUIRED = {"geometry", "disks", "events", "horizon"}


def _check_keys(obj, allowed, required, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object, got {type(obj).__name__}")
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ConfigError(f"{where}: missing key(s) {sorted(missing)}")


def _number(v, where):
    if not _is_number(v):
        raise ConfigError(f"{where}: expected a number, got {v!r}")
    return float(v)


def _integer(v, where):
    if not isinstance(v, int) or isinstance(v, bool):
        raise ConfigError(f"{where}: expected an integer, got {v!r}")
    return v


def config_from_dict(doc: dict, name: Optional[str] = None) -> ScenarioConfig:
    _check_keys(doc, _TOP_KEYS, _REQUIRED, "config")
    g = doc["geometry"]
    _check_keys(g, {"width", "height"}, {"width", "height"}, "geometry")
    width, height = _number(g["width"], "geometry.width"), _number(g["height"], "geometry.height")
    if not (width > 0 and height > 0):
        raise ConfigError(f"geometry: width and height must be positive, got {width}x{height}")
    if not isinstance(doc["disks"], list):
        raise ConfigError("disks: expected an array")
    disks = []
    for k, d in enumerate(doc["disks"]):
        where = f"disks[{k}]"
        keys = {"id", "radius", "x0", "y0", "vx0", "vy0"}
        _check_keys(d, keys, keys, where)
        disks.append(DiskSpec(
            _integer(d["id"], f"{where}.id"), _number(d["radius"], f"{where}.radius"),
            *(ScalarDistribution.from_json(d[key], f"{where}.{key}") for key in ("x0", "y0", "vx0", "vy0"))))
    if not isinstance(doc["events"], list):
        raise ConfigError("events: expected an array")
    events = []
    for k, e in enumerate(doc["events"]):
        where = f"events[{k}]"
        keys = {"name", "disk_id", "rect", "window"}
        _check_keys(e, keys, keys, where)
        if not isinstance(e["name"], str):
            raise ConfigError(f"{where}.name: expected a string")
        rect, window = e["rect"], e["window"]
        if not (isinstance(rect, list) and len(rect) == 4):
            raise ConfigError(f"{where}.rect: expected [x1, y1, x2, y2]")
        if not (isinstance(window, list) and len(window) == 2):
            raise ConfigError(f"{where}.window: expected [t_start, t_end]")
        events.append(RegionEvent(
            e["name"], _integer(e["disk_id"], f"{where}.disk_id"),
            Rect(*(_number(v, f"{where}.rect") for v in rect)),
            tuple(_number(v, f"{where}.window") for v in window)))
    brownian = doc.get("brownian", False)
    if not isinstance(brownian, bool):
        raise ConfigError("brownian: expected true or false")
    return ScenarioConfig(
        geometry=TableGeometry(width, height),
        disks=disks,
        events=events,
        horizon=_number(doc["horizon"], "horizon"),
        sample_tick=_number(doc.get("sample_tick", 0.1), "sample_tick"),
        brownian=brownian,
        speed_multiplier=_number(doc.get("speed_multiplier", 1.0), "speed_multiplier"),
        name=name,
    )


def load_config(text: str, name: Optional[str] = None) -> ScenarioConfig:
    """Parse and validate a JSON scenario document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return config_from_dict(doc, name=name)


def load_config_file(path) -> ScenarioConfig:
    from pathlib import Path

    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    return load_config(text, name=path.stem)


# --- built-in table ---------------------------------------------------------

TABLE = (600.0, 300.0)
RADIUS = 20.0
CUE_START = (200.0, 155.0)
CUE_JITTER = 3.0
CUE_VELOCITY = (20.0, 0.0)
TARGET_BALLS = ((300, 150), (340, 120), (340, 180), (380, 210), (380, 150), (380, 90),
                (420, 240), (420, 180), (420, 120), (420, 60))
RED_BALL_ID = 7
GREEN_SQUARE = (150.0, 270.0, 240.0, 180.0)
RED_SQUARE = (430.0, 120.0, 520.0, 30.0)
BROWNIAN_X = (20.0, 580.0)
BROWNIAN_Y = (20.0, 280.0)
BROWNIAN_V = (-20.0, 20.0)

BUILTIN_NAMES = ("basic", "brownian", "long_time", "fast_cue")


def builtin_scenario(name: str) -> ScenarioConfig:
    """Return one of the four predefined experiments.

    ``basic``: 600x300 table, cue ball at (200, 155 +/- 3) moving at (20, 0)
    into ten resting balls, horizon 500.  ``brownian`` draws every position
    and velocity at random; ``long_time`` doubles the horizon; ``fast_cue``
    hits five times harder.
    """
    if name not in BUILTIN_NAMES:
        raise ConfigError(f"unknown scenario {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
    horizon = 1000.0 if name == "long_time" else 500.0
    P, U = ScalarDistribution.point, ScalarDistribution.uniform
    if name == "brownian":
        disks = [DiskSpec(k, RADIUS, U(*BROWNIAN_X), U(*BROWNIAN_Y), U(*BROWNIAN_V), U(*BROWNIAN_V))
                 for k in range(1 + len(TARGET_BALLS))]
    else:
        cue = DiskSpec(0, RADIUS, P(CUE_START[0]),
                       U(CUE_START[1] - CUE_JITTER, CUE_START[1] + CUE_JITTER),
                       P(CUE_VELOCITY[0]), P(CUE_VELOCITY[1]))
        disks = [cue] + [DiskSpec(k, RADIUS, P(x), P(y), P(0), P(0))
                         for k, (x, y) in enumerate(TARGET_BALLS, start=1)]
    events = [
        RegionEvent("green", 0, Rect(*GREEN_SQUARE), (0.0, horizon)),
        RegionEvent("red", RED_BALL_ID, Rect(*RED_SQUARE), (0.0, horizon)),
    ]
    return ScenarioConfig(
        geometry=TableGeometry(*TABLE),
        disks=disks,
        events=events,
        horizon=horizon,
        sample_tick=0.1,
        brownian=name == "brownian",
        speed_multiplier=5.0 if name == "fast_cue" else 1.0,
        name=name,
    )


# --- sampling ---------------------------------------------------------------

def _overlaps(x, y, r, placed) -> bool:
    for px, py, pr in placed:
        if (x - px) ** 2 + (y - py) ** 2 < (r + pr) ** 2:
            return True
    return False


def sample_initial_state(config: ScenarioConfig, stream) -> TableState:
    """Draw a t=0 table from ``config``.

    ``stream`` is a :class:`RandomStream` or a numpy ``Generator``.  Draws
    happen disk by disk in declaration order as x0, y0, vx0, vy0; fixed
    values consume nothing.  In brownian mode an overlapping disk has its
    position redrawn (earlier disks stay put) before its velocity is drawn.
    """
    gen = stream.generator() if isinstance(stream, RandomStream) else stream
    placed = []
    disks = []
    attempts = 0
    for k, spec in enumerate(config.disks):
        while True:
            attempts += 1
            x = spec.x0.sample(gen)
            y = spec.y0.sample(gen)
            if not _overlaps(x, y, spec.radius, placed):
                break
            if not config.brownian:
                raise PackingError(f"disk {spec.id} overlaps an earlier disk at ({x}, {y})")
            if attempts >= MAX_PLACEMENT_ATTEMPTS:
                raise PackingError(
                    f"could not place disk {spec.id} without overlap in {MAX_PLACEMENT_ATTEMPTS} attempts")
        vx = spec.vx0.sample(gen)
        vy = spec.vy0.sample(gen)
        if k == 0:
            vx *= config.speed_multiplier
            vy *= config.speed_multiplier
        placed.append((x, y, spec.radius))
        disks.append(Disk(spec.id, Vec2(x, y), Vec2(vx, vy), spec.radius))
    return TableState(0.0, disks, 0)


def describe(config: ScenarioConfig) -> str:
    """Multi-line human-readable summary used by the ``scenarios`` command."""

    def fmt(d: ScalarDistribution):
        return f"{d.lo:g}" if d.is_point else f"U[{d.lo:g}, {d.hi:g}]"

    g = config.geometry
    lines = [
        f"table {g.width:g} x {g.height:g}, horizon {config.horizon:g}, tick {config.sample_tick:g}, "
        f"cue speed x{config.speed_multiplier:g}{', brownian' if config.brownian else ''}",
    ]
    for d in config.disks:
        lines.append(f"  disk {d.id:>2}  r={d.radius:g}  pos=({fmt(d.x0)}, {fmt(d.y0)})  "
                     f"vel=({fmt(d.vx0)}, {fmt(d.vy0)})")
    for e in config.events:
        r = e.region
        lines.append(f"  event {e.name}: disk {e.disk_id} in ({r.x1:g}, {r.y1:g})-({r.x2:g}, {r.y2:g}) "
                     f"during [{e.window[0]:g}, {e.window[1]:g}]")
    return "\n".join(lines)
