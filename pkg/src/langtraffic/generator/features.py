"""Raw tensor packing: map regions and codes into padded model inputs."""

from __future__ import annotations

import numpy as np

from .config import CODE_DIM, LANE_FEATURE_DIM
from ..core.types import (
    LaneType,
    LightState,
    MapRegion,
    StructuredScenario,
    ValidationError,
)

_LANE_TYPES = (LaneType.CENTER, LaneType.EDGE, LaneType.BOUNDARY)
_LIGHTS = (LightState.NONE, LightState.RED, LightState.YELLOW, LightState.GREEN)


def lane_features(region: MapRegion, max_lanes: int) -> tuple[np.ndarray, np.ndarray]:
    """(max_lanes, 11) float features and a boolean validity mask."""
    if len(region.lanes) > max_lanes:
        raise ValidationError(
            f"region {region.region_id} has {len(region.lanes)} lanes, cap is {max_lanes}")
    feats = np.zeros((max_lanes, LANE_FEATURE_DIM), dtype=np.float32)
    mask = np.zeros(max_lanes, dtype=bool)
    for i, lane in enumerate(region.lanes):
        feats[i, 0:2] = lane.start
        feats[i, 2:4] = lane.end
        feats[i, 4 + _LANE_TYPES.index(lane.lane_type)] = 1.0
        feats[i, 7 + _LIGHTS.index(lane.light)] = 1.0
        mask[i] = True
    return feats, mask


def code_array(code: StructuredScenario, max_agents: int) -> tuple[np.ndarray, np.ndarray]:
    """(max_agents, 8) integer codes and a boolean validity mask."""
    if len(code.agents) > max_agents:
        raise ValidationError(f"code has {len(code.agents)} agents, cap is {max_agents}")
    codes = np.zeros((max_agents, CODE_DIM), dtype=np.int64)
    mask = np.zeros(max_agents, dtype=bool)
    for i, agent in enumerate(code.agents):
        codes[i] = agent.to_ints()
        mask[i] = True
    return codes, mask
