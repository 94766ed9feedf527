"""Pathway-DAG tracking of a surrogate volcanic-eruption atmosphere model."""

__version__ = "0.1.0"
