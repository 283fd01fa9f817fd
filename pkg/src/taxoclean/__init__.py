"""Taxonomy induction from noisy wiki category networks."""

__version__ = "0.1.0"
