"""Run manifests and provenance blocks for written artifacts."""
from .manifest import (
    VERSION,
    RunManifest,
    canonical_json,
    sha256_file,
    sha256_text,
    write_artifact,
    write_text_artifact,
)

__all__ = [
    "VERSION", "RunManifest", "canonical_json", "sha256_file", "sha256_text",
    "write_artifact", "write_text_artifact",
]
