"""Exact-arithmetic toolkit for preemptive single-machine scheduling
under k-norms of flow time and stretch."""

__version__ = "0.1.0"
