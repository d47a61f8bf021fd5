"""Checkpoint archive: generator config plus named weight tensors.

Loading rebuilds the model from the stored config and refuses any shape
or name mismatch outright.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

import torch

from .config import GeneratorConfig
from .model import ScenarioGenerator, build_model
from ..core.types import ValidationError


def save_checkpoint(model: ScenarioGenerator, path: str | Path,
                    extra: dict[str, Any] | None = None) -> None:
    payload = {
        "config": model.config.to_dict(),
        "state_dict": model.state_dict(),
    }
    if extra:
        overlap = set(extra) & set(payload)
        if overlap:
            raise ValidationError(f"extra checkpoint keys collide: {sorted(overlap)}")
        payload.update(extra)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    torch.save(payload, path)


def load_checkpoint(path: str | Path) -> tuple[ScenarioGenerator, dict[str, Any]]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no checkpoint at {path}")
    payload = torch.load(path, map_location="cpu", weights_only=False)
    if "config" not in payload or "state_dict" not in payload:
        raise ValidationError(f"{path} is not a generator checkpoint")
    config = GeneratorConfig.from_dict(payload["config"])
    model = build_model(config)
    state = payload["state_dict"]
    expected = model.state_dict()
    if set(state) != set(expected):
        missing = sorted(set(expected) - set(state))
        surplus = sorted(set(state) - set(expected))
        raise ValidationError(
            f"{path}: weight names do not match (missing {missing[:3]}, surplus {surplus[:3]})")
    for name, tensor in state.items():
        if tuple(tensor.shape) != tuple(expected[name].shape):
            raise ValidationError(
                f"{path}: weight '{name}' has shape {tuple(tensor.shape)}, "
                f"expected {tuple(expected[name].shape)}")
    model.load_state_dict(state)
    extra = {k: v for k, v in payload.items() if k not in ("config", "state_dict")}
    return model, extra
