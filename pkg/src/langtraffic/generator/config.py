"""Generator hyperparameters. Defaults follow the reference setup; tests
shrink them for speed."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from ..core.types import ValidationError

LANE_FEATURE_DIM = 11  # start(2) + end(2) + type one-hot(3) + light one-hot(4)
CODE_DIM = 8
VARIANCE_FLOOR = 1e-4
LOGIT_CLAMP = 15.0

ATTRIBUTE_DIMS = {"heading": 1, "speed": 1, "size": 2, "shift": 2}


@dataclass(frozen=True)
class GeneratorConfig:
    d: int = 256
    mcg_blocks: int = 5
    transformer_layers: int = 2
    heads: int = 4
    dropout: float = 0.1
    gmm_components: int = 5
    motion_modes: int = 12
    attribute_mlp_width: int = 512
    max_lanes: int = 384
    max_agents: int = 32
    horizon: int = 50

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "dropout":
                if not 0.0 <= value < 1.0:
                    raise ValidationError(f"dropout {value} outside [0, 1)")
            elif value <= 0:
                raise ValidationError(f"{f.name} must be positive, got {value}")
        if self.d % self.heads != 0:
            raise ValidationError(f"d={self.d} not divisible by heads={self.heads}")
        if self.d % CODE_DIM != 0:
            raise ValidationError(f"d={self.d} not divisible by {CODE_DIM} (per-field encoding)")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratorConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown generator config fields: {sorted(unknown)}")
        missing = known - set(data)
        if missing:
            raise ValidationError(f"generator config missing fields: {sorted(missing)}")
        return cls(**data)
