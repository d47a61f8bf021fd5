"""Query-based transformer that decodes structured codes into scenarios."""

from .config import (
    ATTRIBUTE_DIMS,
    CODE_DIM,
    LANE_FEATURE_DIM,
    LOGIT_CLAMP,
    VARIANCE_FLOOR,
    GeneratorConfig,
)
from .features import code_array, lane_features
from .model import (
    ContextGate,
    GeneratorOutput,
    GmmParams,
    McgBlock,
    ScenarioGenerator,
    SinusoidalCodeEncoder,
    build_model,
    masked_max_pool,
)
from .sampling import generate_scenario, sample_scenario
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "ATTRIBUTE_DIMS",
    "CODE_DIM",
    "LANE_FEATURE_DIM",
    "LOGIT_CLAMP",
    "VARIANCE_FLOOR",
    "GeneratorConfig",
    "code_array",
    "lane_features",
    "ContextGate",
    "GeneratorOutput",
    "GmmParams",
    "McgBlock",
    "ScenarioGenerator",
    "SinusoidalCodeEncoder",
    "build_model",
    "masked_max_pool",
    "generate_scenario",
    "sample_scenario",
    "load_checkpoint",
    "save_checkpoint",
]
