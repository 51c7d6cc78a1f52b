"""Render sweep and trajectory figures from harness CSV output."""

__version__ = "0.1.0"

from .render import FIGURE_KINDS, FigureSpec, RenderError, build_figure, render

__all__ = ["FIGURE_KINDS", "FigureSpec", "RenderError", "build_figure",
           "render", "__version__"]
