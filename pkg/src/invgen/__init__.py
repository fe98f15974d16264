"""Verified invariant mining for mini smart contracts."""

__version__ = "0.1.0"
