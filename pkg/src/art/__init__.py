"""Refinement verifier for a small imperative language with linked heaps."""

__version__ = "0.1.0"
