"""Scenario domain types, the rule-based encoder, and serialization."""

from .types import (
    FPS,
    HORIZON,
    MAX_AGENTS,
    MAX_LANES,
    Action,
    AgentAbstract,
    AgentState,
    AgentTrack,
    LaneSegment,
    LaneType,
    LightState,
    MapAbstract,
    MapRegion,
    Orientation,
    Scenario,
    StructuredScenario,
    ValidationError,
)
from .encoder import (
    abstract_map,
    canonicalize,
    classify_actions,
    encode_agent,
    encode_scenario,
    nearest_center_lane,
    to_ego_frame,
)
from .serialization import (
    ParseError,
    deserialize,
    deserialize_structured,
    scenario_from_document,
    scenario_to_document,
    serialize,
    serialize_structured,
    structured_from_document,
    structured_to_document,
)

__all__ = [
    "FPS",
    "HORIZON",
    "MAX_AGENTS",
    "MAX_LANES",
    "Action",
    "AgentAbstract",
    "AgentState",
    "AgentTrack",
    "LaneSegment",
    "LaneType",
    "LightState",
    "MapAbstract",
    "MapRegion",
    "Orientation",
    "Scenario",
    "StructuredScenario",
    "ValidationError",
    "ParseError",
    "abstract_map",
    "canonicalize",
    "classify_actions",
    "encode_agent",
    "encode_scenario",
    "nearest_center_lane",
    "to_ego_frame",
    "deserialize",
    "deserialize_structured",
    "scenario_from_document",
    "scenario_to_document",
    "serialize",
    "serialize_structured",
    "structured_from_document",
    "structured_to_document",
]
