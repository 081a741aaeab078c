"""Exact pipeline from discrete Brouwer instances to constant-rank games."""

__version__ = "0.1.0"
