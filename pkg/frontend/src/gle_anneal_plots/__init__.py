"""Rendering companion for gle-anneal CSV outputs."""

from .render import PlotJob, SchemaError, render

__version__ = "0.1.0"
