"""Steiner tree solver: reductions, multistart heuristic, dual ascent and branch-and-bound."""

from .core import Instance, SteinerTree, parse_stp, read_stp, validate

__version__ = "0.1.0"

__all__ = ["Instance", "SteinerTree", "parse_stp", "read_stp", "validate", "__version__"]
