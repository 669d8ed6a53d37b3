"""Rendering of mpcr experiment CSVs into publication-style figures."""

__version__ = "0.1.0"

from .render import FigureSpec, SchemaMismatch, render

__all__ = ["FigureSpec", "SchemaMismatch", "render"]
