"""Invariant graphs of dissipative twist maps."""

__version__ = "0.1.0"
