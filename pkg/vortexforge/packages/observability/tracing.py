"""
Weave tracing integration.

Tracing is opt-in: nothing is imported from weave/wandb until init_tracing()
succeeds, and traced functions run untouched otherwise.
"""
from __future__ import annotations

import functools
import os
from typing import Callable, TypeVar

from vortexforge.packages.events import emit_event

F = TypeVar("F", bound=Callable)

_weave_initialized = False
_weave_available = False
_ops: dict[str, Callable] = {}


def init_tracing() -> bool:
    """
    Initialize Weave tracing (idempotent)

    Returns True if Weave is available and initialized
    """
    global _weave_initialized, _weave_available

    if _weave_initialized:
        return _weave_available

    _weave_initialized = True

    api_key = os.getenv("WANDB_API_KEY")
    if not api_key:
        return False

    project = os.getenv("VORTEXFORGE_WEAVE_PROJECT", "vortexforge")
    try:
        import wandb
        import weave

        wandb.login(key=api_key)
        weave.init(project_name=project)
        _weave_available = True
        emit_event("tracing.enabled", "observability", payload={"project": project})
        return True
    except ImportError:
        emit_event("tracing.unavailable", "observability", severity="warning",
                   payload={"hint": "pip install 'vortexforge[tracing]'"})
        return False
    except Exception as e:
        emit_event("tracing.unavailable", "observability", severity="warning",
                   error={"type": type(e).__name__, "message": str(e)})
        return False


def tracing_enabled() -> bool:
    return _weave_available


def traced(func: F) -> F:
    """Trace calls with Weave once tracing is initialized; plain call otherwise."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        if not _weave_available:
            return func(*args, **kwargs)

        op = _ops.get(func.__qualname__)
        if op is None:
            import weave

            op = _ops.setdefault(func.__qualname__, weave.op()(func))
        return op(*args, **kwargs)

    return wrapper  # type: ignore[return-value]
