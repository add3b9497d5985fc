"""Figure rendering for the channel-estimation benchmark CSV outputs."""

__version__ = "0.1.0"

from .plots import (EmptySelectionError, PlotSpec, SchemaError,
                    aggregate_mean_nmse, read_rows, render)
