"""
Run settings: the solver configs plus the sweep worker count.

Loaded from an optional JSON file (--config, else VORTEXFORGE_CONFIG) with
the sections linear, scheme, descent, mountain_pass and jobs. Unknown
sections or keys are rejected; CLI flags are applied on top with override().
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional, Union

from vortexforge.packages.chern_simons import SchemeConfig
from vortexforge.packages.errors import ParameterError
from vortexforge.packages.linear import LinearSolveConfig
from vortexforge.packages.variational import DescentConfig, MountainPassConfig

CONFIG_ENV = "VORTEXFORGE_CONFIG"
JOBS_ENV = "CSV_SOLVER_JOBS"

_SECTIONS = {
    "linear": LinearSolveConfig,
    "scheme": SchemeConfig,
    "descent": DescentConfig,
    "mountain_pass": MountainPassConfig,
}


def _default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV)
    if raw is None:
        return 1
    try:
        return int(raw)
    except ValueError:
        raise ParameterError(f"{JOBS_ENV} must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class Settings:
    linear: LinearSolveConfig = field(default_factory=LinearSolveConfig)
    scheme: SchemeConfig = field(default_factory=SchemeConfig)
    descent: DescentConfig = field(default_factory=DescentConfig)
    mountain_pass: MountainPassConfig = field(default_factory=MountainPassConfig)
    jobs: int = 1

    def __post_init__(self):
        if self.jobs < 1:
            raise ParameterError(f"jobs must be >= 1, got {self.jobs}")

    def override(self, section: str, **values: Any) -> "Settings":
        """New Settings with the non-None values replaced in one section."""
        values = {k: v for k, v in values.items() if v is not None}
        if not values:
            return self
        if section == "jobs":
            return replace(self, jobs=values["jobs"])
        return replace(self, **{section: replace(getattr(self, section), **values)})

    def to_dict(self) -> dict:
        d = {name: getattr(self, name).to_dict() for name in _SECTIONS}
        d["jobs"] = self.jobs
        return d


def _build_section(name: str, values: Any):
    cls = _SECTIONS[name]
    if not isinstance(values, dict):
        raise ParameterError(f"config section {name!r} must be an object")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ParameterError(f"unknown keys in config section {name!r}: {', '.join(unknown)}")
    return cls(**values)


def settings_from_dict(data: dict) -> Settings:
    if not isinstance(data, dict):
        raise ParameterError("config file must hold a JSON object")
    unknown = sorted(set(data) - set(_SECTIONS) - {"jobs"})
    if unknown:
        raise ParameterError(f"unknown config sections: {', '.join(unknown)}")
    kwargs: dict[str, Any] = {name: _build_section(name, data[name])
                              for name in _SECTIONS if name in data}
    jobs = data.get("jobs")
    if jobs is not None and (isinstance(jobs, bool) or not isinstance(jobs, int)):
        raise ParameterError(f"jobs must be an integer, got {jobs!r}")
    kwargs["jobs"] = jobs if jobs is not None else _default_jobs()
    return Settings(**kwargs)


def load_settings(path: Optional[Union[str, Path]] = None) -> Settings:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return Settings(jobs=_default_jobs())
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ParameterError(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ParameterError(f"config file {path} is not valid JSON: {e}") from None
    return settings_from_dict(data)
