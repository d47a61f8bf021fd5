"""Ground-truth extraction: what the decoder heads are supervised against."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import geometry as geo
from ..core.types import LaneType, Scenario, StructuredScenario, ValidationError


@dataclass(frozen=True)
class TrainingTargets:
    """Per-agent supervision for one canonical (ego-frame, ego-first) scenario.

    lane_indices index into the region's full lane list; shifts are
    (along, across) offsets from the assigned lane midpoint; trajectories
    are (T-1, 3) poses in each agent's initial frame.
    """

    lane_indices: np.ndarray   # (N,) int64
    headings: np.ndarray       # (N, 1)
    speeds: np.ndarray         # (N, 1)
    sizes: np.ndarray          # (N, 2)
    shifts: np.ndarray         # (N, 2)
    trajectories: np.ndarray   # (N, T-1, 3)

    @property
    def agent_count(self) -> int:
        return int(self.lane_indices.shape[0])


def extract_targets(scenario: Scenario) -> TrainingTargets:
    """Targets for a scenario already in the ego frame with ego first."""
    center_indexed = [
        (idx, lane) for idx, lane in enumerate(scenario.map.lanes)
        if lane.lane_type is LaneType.CENTER
    ]
    if not center_indexed:
        raise ValidationError(f"region {scenario.map.region_id} has no center lanes")

    n = len(scenario.agents)
    horizon = scenario.horizon
    lane_indices = np.zeros(n, dtype=np.int64)
    headings = np.zeros((n, 1))
    speeds = np.zeros((n, 1))
    sizes = np.zeros((n, 2))
    shifts = np.zeros((n, 2))
    trajectories = np.zeros((n, horizon - 1, 3))

    for i, track in enumerate(scenario.agents):
        first = track.states[0]
        lane_idx, lane = min(
            center_indexed,
            key=lambda pair: geo.distance(geo.midpoint(pair[1].start, pair[1].end),
                                          first.position),
        )
        lane_indices[i] = lane_idx
        mid = geo.midpoint(lane.start, lane.end)
        direction = geo.heading_of(lane.start, lane.end)
        ux, uy = math.cos(direction), math.sin(direction)
        dx, dy = first.x - mid[0], first.y - mid[1]
        shifts[i] = (dx * ux + dy * uy, -dx * uy + dy * ux)

        headings[i, 0] = first.heading
        speeds[i, 0] = first.speed
        sizes[i] = (first.length, first.width)

        cos_h, sin_h = math.cos(first.heading), math.sin(first.heading)
        for t, state in enumerate(track.states[1:]):
            px, py = state.x - first.x, state.y - first.y
            trajectories[i, t] = (
                cos_h * px + sin_h * py,
                -sin_h * px + cos_h * py,
                geo.wrap_angle(state.heading - first.heading),
            )

    return TrainingTargets(lane_indices=lane_indices, headings=headings, speeds=speeds,
                           sizes=sizes, shifts=shifts, trajectories=trajectories)


def pair_agents(prediction_count: int, scenario: Scenario,
                code: StructuredScenario) -> list[tuple[int, int]]:
    """Identity pairing by sequence position; counts must agree exactly."""
    n = len(scenario.agents)
    if prediction_count != n or len(code.agents) != n:
        raise ValidationError(
            f"agent count mismatch: prediction={prediction_count}, "
            f"scenario={n}, code={len(code.agents)}")
    return [(i, i) for i in range(n)]
