"""Symbolic workbench for arc spaces over fat points and their class arithmetic."""

__version__ = "0.1.0"
