"""Numerical workbench linking nonlocal-game strategies and approximate algebra representations."""

__version__ = "0.1.0"
