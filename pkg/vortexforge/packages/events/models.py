"""Event data models."""
from __future__ import annotations

import uuid
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Any, Literal, Optional

Severity = Literal["info", "warning", "error"]


@dataclass
class CorrelationIDs:
    """Correlation IDs tying probes and solves back to one CLI run."""
    run_id: str = field(default_factory=lambda: str(uuid.uuid4()))
    trace_id: Optional[str] = None
    parent_id: Optional[str] = None
    probe_id: Optional[str] = None

    def child(self, probe_id: Optional[str] = None) -> "CorrelationIDs":
        """Create a child correlation with a new trace_id."""
        return CorrelationIDs(
            run_id=self.run_id,
            trace_id=str(uuid.uuid4()),
            parent_id=self.trace_id or self.run_id,
            probe_id=probe_id or self.probe_id,
        )

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass
class Event:
    """
    One structured solver event.

    lam and status are the coupling the event is about and the solve outcome
    (converged, diverged, stalled, error). When not given they are taken from
    the payload keys "lambda" and "status", so every scheme, descent, probe and
    sweep event can be filtered on them without opening the payload.
    """
    event_type: str
    component: str
    correlation: CorrelationIDs
    payload: dict[str, Any] = field(default_factory=dict)
    severity: Severity = "info"
    duration_ms: Optional[int] = None
    error: Optional[dict] = None
    lam: Optional[float] = None
    status: Optional[str] = None
    timestamp: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat()
    )

    def __post_init__(self):
        if self.lam is None and isinstance(self.payload.get("lambda"), (int, float)):
            self.lam = float(self.payload["lambda"])
        if self.status is None and isinstance(self.payload.get("status"), str):
            self.status = self.payload["status"]

    def to_dict(self) -> dict:
        d = {
            "event_type": self.event_type,
            "timestamp": self.timestamp,
            "correlation": self.correlation.to_dict(),
            "component": self.component,
            "severity": self.severity,
        }
        if self.lam is not None:
            d["lambda"] = self.lam
        if self.status is not None:
            d["status"] = self.status
        d["payload"] = self.payload
        if self.duration_ms is not None:
            d["duration_ms"] = self.duration_ms
        if self.error:
            d["error"] = self.error
        return d
