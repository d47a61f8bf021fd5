"""Turn decoder outputs into a concrete scenario by taking the most
probable lane, mixture component, and motion mode per agent."""

from __future__ import annotations

import logging
import math

import torch

from .features import code_array, lane_features
from .model import GeneratorOutput, ScenarioGenerator
from ..core.geometry import wrap_angle
from ..core.types import (
    FPS,
    AgentState,
    AgentTrack,
    MapRegion,
    Scenario,
    StructuredScenario,
    ValidationError,
)

logger = logging.getLogger(__name__)

MIN_LENGTH = 1.0   # m, floor applied to decoded vehicle sizes
MIN_WIDTH = 0.5


def sample_scenario(output: GeneratorOutput, code: StructuredScenario,
                    region: MapRegion, batch_index: int = 0) -> Scenario:
    """Most-probable-value decode of one scenario from batched outputs."""
    n = len(code.agents)
    agent_mask = output.agent_mask[batch_index]
    if int(agent_mask.sum()) != n:
        raise ValidationError(
            f"output has {int(agent_mask.sum())} live agents, code has {n}")

    lane_probs = output.lane_probs[batch_index]
    mode_probs = output.mode_probs[batch_index]
    tracks = []
    for i in range(n):
        lane_idx = int(lane_probs[i].argmax())
        if lane_idx >= len(region.lanes):
            raise ValidationError(f"agent {i}: decoded lane {lane_idx} outside region")
        lane = region.lanes[lane_idx]

        decoded = {}
        for name, gmm in output.attributes.items():
            component = int(gmm.log_weights[batch_index, i].argmax())
            decoded[name] = gmm.means[batch_index, i, component].tolist()

        heading = wrap_angle(decoded["heading"][0])
        speed = max(0.0, decoded["speed"][0])
        length = max(MIN_LENGTH, decoded["size"][0])
        width = max(MIN_WIDTH, decoded["size"][1])
        along, across = decoded["shift"]

        dx, dy = lane.end[0] - lane.start[0], lane.end[1] - lane.start[1]
        lane_len = math.hypot(dx, dy)
        if lane_len < 1e-9:
            logger.warning("agent %d: degenerate lane %d, using its start point", i, lane.id)
            mid_x, mid_y, ux, uy = lane.start[0], lane.start[1], 1.0, 0.0
        else:
            mid_x = (lane.start[0] + lane.end[0]) / 2.0
            mid_y = (lane.start[1] + lane.end[1]) / 2.0
            ux, uy = dx / lane_len, dy / lane_len
        x0 = mid_x + along * ux - across * uy
        y0 = mid_y + along * uy + across * ux

        mode = int(mode_probs[i].argmax())
        relative = output.trajectories[batch_index, i, mode].detach().cpu().tolist()

        cos_h, sin_h = math.cos(heading), math.sin(heading)
        states = [AgentState(x=x0, y=y0, heading=heading, speed=speed,
                             length=length, width=width)]
        prev_x, prev_y = x0, y0
        for rel_x, rel_y, rel_theta in relative:
            x = x0 + cos_h * rel_x - sin_h * rel_y
            y = y0 + sin_h * rel_x + cos_h * rel_y
            step_speed = math.hypot(x - prev_x, y - prev_y) * FPS
            states.append(AgentState(x=x, y=y, heading=wrap_angle(heading + rel_theta),
                                     speed=step_speed, length=length, width=width))
            prev_x, prev_y = x, y
        tracks.append(AgentTrack(agent_id=i + 1, states=tuple(states)))

    return Scenario(map=region, agents=tuple(tracks), ego_index=0)


@torch.no_grad()
def generate_scenario(model: ScenarioGenerator, code: StructuredScenario,
                      region: MapRegion) -> tuple[Scenario, GeneratorOutput]:
    """Full inference pass: pack inputs, decode deterministically, sample."""
    was_training = model.training
    model.eval()
    try:
        device = next(model.parameters()).device
        dtype = next(model.parameters()).dtype
        feats, lane_mask = lane_features(region, model.config.max_lanes)
        codes, agent_mask = code_array(code, model.config.max_agents)
        output = model(
            torch.as_tensor(feats, dtype=dtype, device=device).unsqueeze(0),
            torch.as_tensor(lane_mask, device=device).unsqueeze(0),
            torch.as_tensor(codes, device=device).unsqueeze(0),
            torch.as_tensor(agent_mask, device=device).unsqueeze(0),
        )
        return sample_scenario(output, code, region), output
    finally:
        model.train(was_training)
