"""Percolation on random planar maps: weight calculus, peeling walks and exact oracles."""

__version__ = "0.1.0"
