"""Figure rendering for rampmcmc result files."""

from .csvdata import ResultTable, SchemaError, load_fit, load_table
from .figures import FIGURE_KINDS, FigureSpec, render

__version__ = "0.1.0"
