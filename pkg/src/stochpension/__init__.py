"""Stochastic pension accumulation and consumption models."""

__version__ = "0.1.0"
