"""Exact special cocycles for the theta correspondence and checks of their boundary behaviour."""

__version__ = "0.1.0"
