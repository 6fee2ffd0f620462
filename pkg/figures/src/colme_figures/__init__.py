from .render import FigureSpec, MissingSeriesError, load_rows, render

__version__ = "0.1.0"
