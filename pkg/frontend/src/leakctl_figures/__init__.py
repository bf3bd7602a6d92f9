"""Figure rendering for leakctl CSV outputs.

This package never recomputes physics: every figure is a pure function of
the CSV files named in its spec.
"""

from .figspec import FigureSpec, SpecError, load_spec
from .render import render

__all__ = ["FigureSpec", "SpecError", "load_spec", "render"]

__version__ = "0.1.0"
