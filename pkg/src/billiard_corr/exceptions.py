"""Exception hierarchy shared across the package."""


class BilliardError(Exception):
    """Base class for all errors raised by this package."""


class ContractError(BilliardError, ValueError):
    """An operation was called with arguments violating its precondition."""


class ConsistencyError(BilliardError, RuntimeError):
    """The simulated state broke an invariant; indicates a scheduling bug."""


class ConfigError(BilliardError, ValueError):
    """A scenario configuration could not be parsed or failed validation."""


class PackingError(BilliardError, RuntimeError):
    """Rejection sampling could not place the disks without overlap."""


class SimulationError(BilliardError, RuntimeError):
    """A trial failed; carries the coordinates needed to replay it."""

    def __init__(self, message, trial_index=None, master_seed=None):
        super().__init__(message)
        self.trial_index = trial_index
        self.master_seed = master_seed

    def __str__(self):
        base = super().__str__()
        if self.trial_index is None:
            return base
        return f"{base} (replay: trial_index={self.trial_index}, seed={self.master_seed})"


class InsufficientDataError(BilliardError, ValueError):
    """Too few usable points to fit a statistic."""
