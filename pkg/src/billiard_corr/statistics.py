"""Frequency estimates, the correlation magnitude and its uncertainty.

Outcomes are handled as an ``(N, 2)`` boolean matrix: column 0 is event E1,
column 1 is E2, rows are tables in trial-index order.  Anything with a
``flags`` attribute (e.g. :class:`~billiard_corr.ensemble.TrialOutcome`) is
accepted in place of a row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exceptions import ContractError, InsufficientDataError
from .rng import BOOTSTRAP, RandomStream

PROB_TOL = 1e-12


@dataclass(frozen=True)
class ProbabilityEstimate:
    event: str
    count: int
    n: int
    p_hat: float


def estimate_probability(count: int, n: int, event: str = "") -> ProbabilityEstimate:
    """Relative frequency ``count / n`` of an event over ``n`` tables."""
    if n < 1:
        raise ContractError(f"need at least one table, got N={n}")
    if not 0 <= count <= n:
        raise ContractError(f"count {count} outside [0, {n}]")
    return ProbabilityEstimate(event, int(count), int(n), count / n)


def correlation_delta(p12: float, p1: float, p2: float) -> float:
    """``|p12 - p1*p2|``: distance of the joint frequency from independence."""
    for label, p in (("p12", p12), ("p1", p1), ("p2", p2)):
        if not 0.0 <= p <= 1.0:
            raise ContractError(f"{label}={p!r} is not a probability")
    if p12 > min(p1, p2) + PROB_TOL:
        raise ContractError(f"joint probability {p12!r} exceeds a marginal ({p1!r}, {p2!r})")
    return abs(p12 - p1 * p2)


def flag_matrix(outcomes) -> np.ndarray:
    """Coerce outcomes to an ``(N, 2)`` bool array of (E1, E2) flags."""
    if isinstance(outcomes, np.ndarray):
        arr = outcomes
    else:
        rows = list(outcomes)
        if rows and hasattr(rows[0], "flags"):
            arr = np.array([r.flags[:2] for r in rows], dtype=bool)
        else:
            arr = np.asarray(rows)
    if arr.ndim != 2 or arr.shape[1] < 2:
        raise ContractError(f"outcomes must have shape (N, >=2), got {arr.shape}")
    if arr.shape[0] == 0:
        raise ContractError("outcomes are empty")
    return arr[:, :2].astype(bool, copy=False)


def _cell_counts(flags: np.ndarray):
    e1, e2 = flags[:, 0], flags[:, 1]
    c11 = int(np.count_nonzero(e1 & e2))
    c1 = int(np.count_nonzero(e1))
    c2 = int(np.count_nonzero(e2))
    return c11, c1 - c11, c2 - c11, len(flags) - c1 - c2 + c11


def delta_from_counts(c1: int, c2: int, c12: int, n: int) -> float:
    """Exact-rational evaluation of the correlation magnitude, rounded once."""
    return float(abs(Fraction(c12, n) - Fraction(c1, n) * Fraction(c2, n)))


@dataclass(frozen=True)
class CorrelationReport:
    n: int
    p1_hat: float
    p2_hat: float
    p12_hat: float
    product: float
    delta: float
    ci_halfwidth: float
    ci_level: float

    @property
    def significant(self) -> bool:
        return self.delta - self.ci_halfwidth > 0


def bootstrap_delta_ci(outcomes, B: int = 1000, level: float = 0.95, seed: int = 0):
    """Point estimate of the correlation and the percentile-bootstrap half-width.

    Tables are resampled with replacement.  Since the statistic depends on a
    resample only through its four (E1, E2) cell counts, each resample is
    drawn directly as a multinomial over those cells, which has exactly the
    law of N indices drawn with replacement.

    Returns ``(delta, ci_halfwidth)``.
    """
    if B < 100:
        raise ContractError(f"need B >= 100 bootstrap resamples, got {B}")
    if not 0.0 < level < 1.0:
        raise ContractError(f"level must lie in (0, 1), got {level}")
    flags = flag_matrix(outcomes)
    n = len(flags)
    cells = _cell_counts(flags)
    c11, c10, c01, _ = cells
    delta = correlation_delta(c11 / n, (c11 + c10) / n, (c11 + c01) / n)
    gen = RandomStream(seed, 0, BOOTSTRAP).generator()
    draws = gen.multinomial(n, np.array(cells, dtype=np.float64) / n, size=B)
    p12 = draws[:, 0] / n
    p1 = (draws[:, 0] + draws[:, 1]) / n
    p2 = (draws[:, 0] + draws[:, 2]) / n
    boot = np.abs(p12 - p1 * p2)
    lo, hi = np.quantile(boot, [(1.0 - level) / 2.0, (1.0 + level) / 2.0])
    return delta, float(hi - lo) / 2.0


def correlation_report(outcomes, B: int = 1000, level: float = 0.95, seed: int = 0) -> CorrelationReport:
    flags = flag_matrix(outcomes)
    n = len(flags)
    c11, c10, c01, _ = _cell_counts(flags)
    p1 = estimate_probability(c11 + c10, n).p_hat
    p2 = estimate_probability(c11 + c01, n).p_hat
    p12 = estimate_probability(c11, n).p_hat
    delta, half = bootstrap_delta_ci(flags, B, level, seed)
    return CorrelationReport(n, p1, p2, p12, p1 * p2, delta, half, level)


@dataclass(frozen=True)
class ConvergenceTrace:
    """Running estimates over the first ``n`` tables at each checkpoint."""

    n: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    p12: np.ndarray
    product: np.ndarray

    def __len__(self):
        return len(self.n)

    def rows(self):
        for k in range(len(self.n)):
            yield (int(self.n[k]), float(self.p1[k]), float(self.p2[k]),
                   float(self.p12[k]), float(self.product[k]))

    @classmethod
    def empty(cls) -> "ConvergenceTrace":
        z = np.zeros(0)
        return cls(np.zeros(0, dtype=np.int64), z, z, z, z)


def _check_checkpoints(checkpoints, n: int) -> np.ndarray:
    cps = np.asarray(checkpoints, dtype=np.int64).ravel()
    if cps.size and (np.any(np.diff(cps) <= 0) or cps[0] < 1 or cps[-1] > n):
        raise ContractError(f"checkpoints must be strictly increasing within [1, {n}]")
    return cps


def convergence_trace(outcomes, checkpoints) -> ConvergenceTrace:
    flags = flag_matrix(outcomes)
    cps = _check_checkpoints(checkpoints, len(flags))
    c1 = np.cumsum(flags[:, 0], dtype=np.int64)
    c2 = np.cumsum(flags[:, 1], dtype=np.int64)
    c12 = np.cumsum(flags[:, 0] & flags[:, 1], dtype=np.int64)
    idx = cps - 1
    p1 = c1[idx] / cps
    p2 = c2[idx] / cps
    return ConvergenceTrace(cps, p1, p2, c12[idx] / cps, p1 * p2)


def default_checkpoints(n: int, count: int = 50, spacing: str = "log", start: int = 100) -> np.ndarray:
    """Checkpoint trial counts ending at ``n``.

    Log spacing runs from ``start`` (or 1 when ``n`` is smaller) to ``n``;
    duplicates after rounding are dropped, so fewer than ``count`` points
    may come back.  Linear spacing is ``n/count, 2n/count, ..., n``.
    """
    if n < 1 or count < 1:
        raise ContractError(f"need n >= 1 and count >= 1, got n={n}, count={count}")
    if spacing == "log":
        lo = start if n > start else 1
        pts = np.geomspace(lo, n, count) if count > 1 else np.array([n])
    elif spacing == "linear":
        pts = np.linspace(n / count, n, count)
    else:
        raise ContractError(f"unknown checkpoint spacing {spacing!r}")
    cps = np.unique(np.clip(np.rint(pts).astype(np.int64), 1, n))
    cps[-1] = n
    return cps


def fit_fluctuation_slope(trace: ConvergenceTrace, reference=None, min_points: int = 3) -> float:
    """Log-log slope of ``|p12(n) - p12_ref|`` against ``n``.

    ``reference`` defaults to the joint estimate of the last row.  Points
    whose deviation is at most 1e-12 are skipped.  For independent tables the
    deviation shrinks like ``n**-0.5``.
    """
    n = np.asarray(trace.n, dtype=np.float64)
    if len(n) < 5:
        raise ContractError(f"need at least 5 checkpoints, got {len(n)}")
    if n[-1] < 10 * n[0]:
        raise ContractError("checkpoints must span at least one decade")
    ref = trace.p12[-1] if reference is None else reference
    dev = np.abs(np.asarray(trace.p12) - ref)
    keep = dev > 1e-12
    if np.count_nonzero(keep) < min_points:
        raise InsufficientDataError(
            f"only {int(np.count_nonzero(keep))} checkpoints deviate from the reference")
    slope, _ = np.polyfit(np.log(n[keep]), np.log(dev[keep]), 1)
    return float(slope)


def standard_error(p: float, n: int) -> float:
    return math.sqrt(p * (1.0 - p) / n)
