"""Static figures from qbil run-directory CSV files."""

from .figures import KINDS, FigureSpec, PlotsError, SchemaError, render_figure

__all__ = ["KINDS", "FigureSpec", "PlotsError", "SchemaError", "render_figure"]
__version__ = "0.1.0"
