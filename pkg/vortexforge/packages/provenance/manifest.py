"""
Provenance for generated artifacts.

Every JSON artifact gets a `_provenance` key holding only deterministic
fields, so reruns with the same inputs and configs are byte-identical. The
full RunManifest, wall time and run id included, goes to a sidecar file
`<artifact>.manifest.json`. CSV artifacts carry the sidecar only.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional, Union

from vortexforge import __version__

VERSION = __version__
GENERATOR = "vortexforge"


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_file(path: Union[str, Path]) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunManifest:
    """What produced an artifact: command, full config snapshot and input hashes."""
    command: str
    config: dict[str, Any] = field(default_factory=dict)
    input_hashes: dict[str, str] = field(default_factory=dict)
    seed: int = 0
    tool_version: str = VERSION
    wall_ms: Optional[int] = None
    run_id: Optional[str] = None

    @property
    def config_hash(self) -> str:
        return sha256_text(canonical_json(self.config))[:16]

    def provenance_block(self) -> dict:
        """Deterministic subset embedded in the artifact itself."""
        return {
            "generator": GENERATOR,
            "version": self.tool_version,
            "command": self.command,
            "seed": self.seed,
            "config_hash": self.config_hash,
            "input_hashes": dict(sorted(self.input_hashes.items())),
        }

    def to_dict(self) -> dict:
        return {
            **self.provenance_block(),
            "config": self.config,
            "wall_ms": self.wall_ms,
            "run_id": self.run_id,
            "generated_at": datetime.now(timezone.utc).isoformat(),
        }


def _sidecar(path: Path, manifest: RunManifest) -> Path:
    sidecar = path.with_name(path.name + ".manifest.json")
    sidecar.write_text(json.dumps(manifest.to_dict(), indent=2, ensure_ascii=False) + "\n",
                       encoding="utf-8")
    return sidecar


def write_artifact(path: Union[str, Path], payload: dict, manifest: RunManifest) -> Path:
    """Write payload as JSON with a `_provenance` block, plus the sidecar manifest."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = dict(payload)
    data["_provenance"] = manifest.provenance_block()
    path.write_text(json.dumps(data, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    _sidecar(path, manifest)
    return path


def write_text_artifact(path: Union[str, Path], text: str, manifest: RunManifest) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    _sidecar(path, manifest)
    return path
