"""Computational lab for sums of four fourth powers in short intervals."""

__version__ = "0.1.0"
