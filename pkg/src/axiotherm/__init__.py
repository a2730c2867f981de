"""Reservoir-free entropy and temperature measurement engine."""
__version__ = "0.1.0"
