"""Optional Weave tracing for the long-running solver entry points."""
from .tracing import init_tracing, traced, tracing_enabled

__all__ = ["init_tracing", "traced", "tracing_enabled"]
