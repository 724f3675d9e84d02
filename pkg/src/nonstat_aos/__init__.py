"""Adaptive operator selection on non-stationary, use-decaying operators."""

__version__ = "0.1.0"
