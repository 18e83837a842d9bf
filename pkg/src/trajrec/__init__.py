"""Metric trajectory reconstruction from paired monocular SfM results."""

from .errors import TrajrecError

__version__ = "0.1.0"

__all__ = ["TrajrecError", "__version__"]
