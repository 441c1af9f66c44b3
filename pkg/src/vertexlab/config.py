"""Global JSON configuration: file lookup and the per-module sections."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any

ENV_VAR = "VERTEXLAB_CONFIG"


@dataclass(frozen=True)
class QFunctionConfig:
    """Truncation control for the infinite products behind phi and theta."""

    truncation_floor: float = 1e-18
    max_terms: int = 10_000
    zero_tol: float = 1e-12
    circle_tol: float = 1e-12

    def __post_init__(self):
        if not 0 < self.truncation_floor < 1:
            raise ValueError("truncation_floor must lie in (0, 1)")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")

    @classmethod
    def from_dict(cls, d: dict[str, Any] | None) -> "QFunctionConfig":
        d = d or {}
        known = {k: d[k] for k in ("truncation_floor", "max_terms", "zero_tol", "circle_tol") if k in d}
        return cls(**known)


DEFAULT_QCONFIG = QFunctionConfig()
_active_qconfig = DEFAULT_QCONFIG


def set_qconfig(cfg: QFunctionConfig) -> None:
    """Replace the process-wide default; intended to be called once at start-up."""
    global _active_qconfig
    _active_qconfig = cfg


def current_qconfig() -> QFunctionConfig:
    return _active_qconfig


def resolve_config_path(path: str | os.PathLike | None) -> Path | None:
    if path:
        return Path(path)
    env = os.environ.get(ENV_VAR)
    return Path(env) if env else None


def load_config(path: str | os.PathLike | None) -> dict[str, Any]:
    """Read the JSON config at ``path`` (or $VERTEXLAB_CONFIG); empty dict when neither is set."""
    resolved = resolve_config_path(path)
    if resolved is None:
        return {}
    with open(resolved) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"config {resolved} must hold a JSON object")
    return data
