"""scikit-learn style front ends for the ensemble and the correlation estimate.

>>> ens = BilliardEnsemble("basic", n_tables=500, seed=3)
>>> flags = ens.fit_transform()                 # (500, 2) bool matrix
>>> est = CorrelationEstimator(n_bootstrap=200).fit(flags)
>>> est.delta_ >= 0
True
"""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .ensemble import run_ensemble
from .scenario import BUILTIN_NAMES, ScenarioConfig, builtin_scenario, load_config_file
from .statistics import (
    convergence_trace,
    correlation_report,
    default_checkpoints,
)


def resolve_scenario(scenario) -> ScenarioConfig:
    """A :class:`ScenarioConfig` from a config, a builtin name or a JSON path."""
    if isinstance(scenario, ScenarioConfig):
        return scenario
    if isinstance(scenario, str) and scenario in BUILTIN_NAMES:
        return builtin_scenario(scenario)
    return load_config_file(scenario)


def _check_seed(seed, name):
    if not isinstance(seed, numbers.Integral) or not 0 <= seed < 2**64:
        raise ValueError(f"{name} must be an integer in [0, 2**64), got {seed!r}")
    return int(seed)


class BilliardEnsemble(TransformerMixin, BaseEstimator, auto_wrap_output_keys=None):
    """Simulate ``n_tables`` independent billiard tables.

    ``fit`` runs the ensemble; ``transform`` returns the per-table event
    flags as an ``(n_tables, n_events)`` bool matrix.  The input ``X`` is
    ignored: the tables are generated, not observed.

    Parameters
    ----------
    scenario : str or ScenarioConfig
        Builtin name (``basic``, ``brownian``, ``long_time``, ``fast_cue``),
        path to a JSON config, or a config object.
    n_tables : int
    seed : int
        Master seed; table ``k`` uses stream ``(seed, k)``.
    checkpoints : array-like of int, optional
        Trial counts for the running-estimate trace; defaults to 50
        log-spaced points from 100 to ``n_tables``.
    workers : int, optional
        Thread count.  Never affects the result.

    Attributes
    ----------
    result_ : EnsembleResult
    flags_ : ndarray of bool
    trace_ : ConvergenceTrace
    """

    def __init__(self, scenario="basic", n_tables=5000, seed=0, checkpoints=None, workers=None):
        self.scenario = scenario
        self.n_tables = n_tables
        self.seed = seed
        self.checkpoints = checkpoints
        self.workers = workers

    def fit(self, X=None, y=None):
        if not isinstance(self.n_tables, numbers.Integral) or self.n_tables < 1:
            raise ValueError(f"n_tables must be a positive integer, got {self.n_tables!r}")
        seed = _check_seed(self.seed, "seed")
        config = resolve_scenario(self.scenario)
        cps = (default_checkpoints(self.n_tables) if self.checkpoints is None
               else np.asarray(self.checkpoints, dtype=np.int64))
        self.config_ = config
        self.result_ = run_ensemble(config, int(self.n_tables), seed, cps, self.workers)
        self.flags_ = self.result_.flags
        self.trace_ = self.result_.trace
        self.event_names_ = self.result_.event_names
        return self

    def transform(self, X=None):
        check_is_fitted(self, "flags_")
        return self.flags_.copy()

    def fit_transform(self, X=None, y=None):
        return self.fit(X, y).transform(X)


class CorrelationEstimator(BaseEstimator):
    """Estimate the correlation between two binary events from table outcomes.

    ``fit`` takes an ``(N, >=2)`` 0/1 matrix; columns 0 and 1 are E1 and E2.
    The half-width is from a percentile bootstrap over tables.
    """

    def __init__(self, n_bootstrap=1000, ci_level=0.95, random_state=0):
        self.n_bootstrap = n_bootstrap
        self.ci_level = ci_level
        self.random_state = random_state

    def _validate(self, X):
        X = check_array(X, dtype=None, ensure_min_features=2)
        if X.dtype != bool:
            if not np.isin(X, (0, 1)).all():
                raise ValueError("outcome matrix must contain only 0/1 values")
            X = X.astype(bool)
        return X[:, :2]

    def fit(self, X, y=None):
        X = self._validate(X)
        seed = _check_seed(self.random_state, "random_state")
        rep = correlation_report(X, self.n_bootstrap, self.ci_level, seed)
        self.report_ = rep
        self.n_samples_ = rep.n
        self.p1_, self.p2_, self.p12_ = rep.p1_hat, rep.p2_hat, rep.p12_hat
        self.delta_ = rep.delta
        self.ci_halfwidth_ = rep.ci_halfwidth
        self.significant_ = rep.significant
        self.flags_ = X
        return self

    def transform(self, X):
        """Running estimates ``(p1, p2, p12, p1*p2)`` after each row of ``X``."""
        X = self._validate(X)
        tr = convergence_trace(X, np.arange(1, len(X) + 1))
        return np.column_stack([tr.p1, tr.p2, tr.p12, tr.product])

    def trace(self, checkpoints=None):
        check_is_fitted(self, "flags_")
        if checkpoints is None:
            checkpoints = default_checkpoints(len(self.flags_))
        return convergence_trace(self.flags_, checkpoints)
