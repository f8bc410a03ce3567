"""Batch figure rendering for simulator trace and sweep files.

Consumes only the documented CSV/JSON output formats of the simulator; it has
no dependency on the simulator package itself.
"""

from .figures import FIGURE_KINDS, FigureSpec, SchemaError, build_figure, render

__all__ = ["FIGURE_KINDS", "FigureSpec", "SchemaError", "build_figure", "render"]
__version__ = "0.1.0"
