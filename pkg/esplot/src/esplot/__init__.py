"""Figure rendering for estrack trajectory CSV files."""

from .render import (ALL_FIGURES, EmptyPlotError, PlotJob, SchemaError,
                     load_trajectory, render)

__version__ = "0.1.0"

__all__ = ["ALL_FIGURES", "EmptyPlotError", "PlotJob", "SchemaError",
           "load_trajectory", "render"]
