"""Distributed maximal fractional matching with few factors of two in the denominators."""

from .algorithms import mfm
from .graph import Edge, PortGraph, parse_graph, format_graph, validate
from .lowerbound import harness
from .sim import Model, run, run_loopy
from .verify import verify

__all__ = ["Edge", "Model", "PortGraph", "format_graph", "harness", "mfm", "parse_graph", "run", "run_loopy", "validate", "verify"]
