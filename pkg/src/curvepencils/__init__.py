"""Exact invariants of pencils of plane curves on arrangement complements."""

__version__ = "0.1.0"
