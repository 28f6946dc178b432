"""Precision limits of saturable-absorption measurements."""

__version__ = "1.0.0"
