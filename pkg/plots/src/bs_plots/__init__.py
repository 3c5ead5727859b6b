"""Figure renderers for bs-spectra CSV outputs."""

from .figures import FigureSpec, RenderResult, marching_squares, render

__all__ = ["FigureSpec", "RenderResult", "marching_squares", "render"]
