"""Offline figure rendering for the gauge-chain simulation file formats."""

from .render import plot_saturation, plot_timeseries
from .schema import SchemaError, read_fit, read_summary, read_timeseries

__version__ = "0.1.0"
