"""Hard-disk billiard ensembles and the correlation between region passages."""

__version__ = "0.1.0"
