"""Restricted Radon-type transforms on R^n, S^n and H^n."""

__version__ = "0.1.0"
