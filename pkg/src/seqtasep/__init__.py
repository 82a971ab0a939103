"""Discrete-time sequential-update TASEP with periodic initial data."""
__version__ = "0.1.0"
