"""Many independent tables: region-passage detection and outcome counts.

Initial states are drawn sequentially in Python from per-trial streams; the
simulations themselves run in compiled code that releases the GIL, so a
thread pool gives real parallelism.  Results are written into index-ordered
buffers, which makes the output independent of the worker count.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels as K
from .dynamics import _STATUS_TEXT
from .exceptions import ContractError, SimulationError
from .rng import RandomStream
from .scenario import ScenarioConfig, sample_initial_state
from .statistics import ConvergenceTrace, convergence_trace

logger = logging.getLogger(__name__)

MAX_EVENTS = 10**7


def segment_crosses_rect(p0, p1, rect) -> bool:
    """Whether the closed segment ``p0 -> p1`` meets the closed rectangle.

    ``rect`` is a :class:`~billiard_corr.scenario.Rect` or an
    ``(xmin, ymin, xmax, ymax)`` tuple.
    """
    xmin, ymin, xmax, ymax = rect.bounds if hasattr(rect, "bounds") else rect
    return bool(K.segment_hits_rect(float(p0[0]), float(p0[1]), float(p1[0]), float(p1[1]),
                                    float(xmin), float(ymin), float(xmax), float(ymax)))


@dataclass(frozen=True)
class TrialOutcome:
    trial_index: int
    flags: tuple
    collision_count: int
    final_time: float


@dataclass
class EnsembleResult:
    n: int
    master_seed: int
    event_names: tuple
    flags: np.ndarray
    collision_counts: np.ndarray
    horizon: float
    trace: ConvergenceTrace = field(default_factory=ConvergenceTrace.empty)

    @property
    def counts(self) -> dict:
        return {name: int(np.count_nonzero(self.flags[:, k])) for k, name in enumerate(self.event_names)}

    @property
    def joint_count(self) -> int:
        return int(np.count_nonzero(self.flags[:, 0] & self.flags[:, 1]))

    @property
    def outcomes(self) -> list:
        return [TrialOutcome(m, tuple(bool(f) for f in self.flags[m]), int(self.collision_counts[m]),
                             self.horizon)
                for m in range(self.n)]


class _Compiled:
    """Scenario constants in the array layout the kernels expect."""

    def __init__(self, config: ScenarioConfig):
        self.radii = np.array([d.radius for d in config.disks], dtype=np.float64)
        self.width = float(config.geometry.width)
        self.height = float(config.geometry.height)
        self.horizon = float(config.horizon)
        self.ev_disk = np.array([config.disk_index(e.disk_id) for e in config.events], dtype=np.int64)
        self.ev_rect = np.array([e.region.bounds for e in config.events], dtype=np.float64).reshape(-1, 4)
        self.ev_window = np.array([e.window for e in config.events], dtype=np.float64).reshape(-1, 2)


def _sample_batch(config, master_seed, start, stop):
    n = len(config.disks)
    pos = np.empty((stop - start, n, 2))
    vel = np.empty((stop - start, n, 2))
    for m in range(start, stop):
        state = sample_initial_state(config, RandomStream(master_seed, m))
        p, v, _ = state.to_arrays()
        pos[m - start] = p
        vel[m - start] = v
    return pos, vel


def _fail(status, trial_index, master_seed):
    return SimulationError(f"trial failed: {_STATUS_TEXT[status]}", trial_index, master_seed)


def run_trial(config: ScenarioConfig, trial_index: int, master_seed: int) -> TrialOutcome:
    """Simulate table ``trial_index`` to the horizon and latch its region flags."""
    c = _Compiled(config)
    pos, vel = _sample_batch(config, master_seed, trial_index, trial_index + 1)
    flags = np.zeros(len(config.events), dtype=np.bool_)
    count, status = K.run_one(pos[0], vel[0], c.radii, c.width, c.height, c.horizon,
                              c.ev_disk, c.ev_rect, c.ev_window, flags, MAX_EVENTS)
    if status != K.STATUS_OK:
        raise _fail(status, trial_index, master_seed)
    return TrialOutcome(trial_index, tuple(bool(f) for f in flags), int(count), c.horizon)


def _chunks(n, workers):
    size = max(1, min(2000, -(-n // (4 * workers))))
    return [(a, min(n, a + size)) for a in range(0, n, size)]


def run_ensemble(config: ScenarioConfig, n: int, master_seed: int = 0,
                 checkpoints=None, workers: Optional[int] = None) -> EnsembleResult:
    """Run tables ``0 .. n-1`` and aggregate their outcomes.

    ``checkpoints`` are trial counts at which running estimates are recorded
    (see :func:`~billiard_corr.statistics.convergence_trace`).  ``workers``
    defaults to the number of CPUs and never changes the result.
    """
    if n < 1:
        raise ContractError(f"need at least one table, got N={n}")
    if not 0 <= master_seed < 2**64:
        raise ContractError(f"seed must be a 64-bit unsigned integer, got {master_seed}")
    workers = workers or os.cpu_count() or 1
    if workers < 1:
        raise ContractError(f"workers must be positive, got {workers}")
    c = _Compiled(config)
    flags = np.zeros((n, len(config.events)), dtype=np.bool_)
    counts = np.zeros(n, dtype=np.int64)
    status = np.zeros(n, dtype=np.int64)

    def work(span):
        a, b = span
        pos, vel = _sample_batch(config, master_seed, a, b)
        bad = K.run_batch(pos, vel, c.radii, c.width, c.height, c.horizon, c.ev_disk,
                          c.ev_rect, c.ev_window, MAX_EVENTS, flags[a:b], counts[a:b], status[a:b])
        return -1 if bad < 0 else a + bad

    spans = _chunks(n, workers)
    if workers == 1:
        failures = [work(s) for s in spans]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            failures = list(pool.map(work, spans))
    failed = [m for m in failures if m >= 0]
    if failed:
        m = min(failed)
        raise _fail(int(status[m]), m, master_seed)
    logger.debug("ran %d tables, mean %.1f events", n, counts.mean())
    result = EnsembleResult(n, master_seed, tuple(e.name for e in config.events), flags, counts,
                            c.horizon)
    if checkpoints is not None and len(checkpoints):
        result.trace = convergence_trace(flags, checkpoints)
    return result
