"""Explainable intrusion-detection console."""

__version__ = "0.1.0"
