"""vortexforge events -- structured solver events with correlation IDs."""
from .emitter import EventEmitter, emit_event, get_emitter, new_run_id, set_emitter
from .models import CorrelationIDs, Event, Severity

__all__ = [
    "EventEmitter", "emit_event", "get_emitter", "set_emitter", "new_run_id",
    "Event", "CorrelationIDs", "Severity",
]
