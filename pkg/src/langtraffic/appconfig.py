"""Single-document configuration for the service and CLI."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .core.types import ValidationError


@dataclass
class AppConfig:
    checkpoint: str | None = None      # None: seeded random-init demo weights
    index: str | None = None           # None: in-memory index over bundled maps
    store_dir: str = "scenario_store"
    offline: bool = True
    retrieval_k: int = 10
    seed: int = 0
    weights_seed: int = 0
    llm_endpoint: str | None = None
    llm_model: str = "gpt-4"
    llm_api_key_env: str = "LLM_API_KEY"

    @classmethod
    def from_file(cls, path: str | Path) -> "AppConfig":
        raw = json.loads(Path(path).read_text())
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    def to_file(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(asdict(self), indent=2))
