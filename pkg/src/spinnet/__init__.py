"""Exact recoupling arithmetic for labelled trivalent networks."""

__version__ = "0.1.0"
