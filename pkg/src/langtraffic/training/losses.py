"""Reconstruction losses: lane cross-entropy, attribute mixture NLL, and
closest-mode motion error. Sums run over agents; the batch is averaged."""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import Tensor

from ..core.types import ValidationError
from ..generator.model import GeneratorOutput


class NonFiniteLossError(RuntimeError):
    def __init__(self, breakdown: dict[str, float]):
        super().__init__(f"non-finite loss: {breakdown}")
        self.breakdown = breakdown


@dataclass
class BatchTargets:
    """Padded, batched targets; padded agents are masked out of every sum."""

    lane_indices: Tensor   # (B, N) int64
    headings: Tensor       # (B, N, 1)
    speeds: Tensor         # (B, N, 1)
    sizes: Tensor          # (B, N, 2)
    shifts: Tensor         # (B, N, 2)
    trajectories: Tensor   # (B, N, T-1, 3)
    agent_mask: Tensor     # (B, N) bool


@dataclass
class LossBreakdown:
    total: Tensor
    position: Tensor
    attr: Tensor
    motion: Tensor

    def detached(self) -> dict[str, float]:
        return {
            "loss_total": float(self.total.detach()),
            "loss_position": float(self.position.detach()),
            "loss_attr": float(self.attr.detach()),
            "loss_motion": float(self.motion.detach()),
        }


def closest_mode_indices(trajectories: Tensor, target: Tensor) -> Tensor:
    """argmin_k of the summed squared pose error. trajectories: (B,N,K,T-1,3),
    target: (B,N,T-1,3) -> (B,N) int64."""
    with torch.no_grad():
        sq = ((trajectories - target.unsqueeze(2)) ** 2).sum(dim=(-1, -2))
        return sq.argmin(dim=-1)


def compute_loss(output: GeneratorOutput, targets: BatchTargets) -> LossBreakdown:
    mask = targets.agent_mask
    if mask.shape != output.agent_mask.shape or not bool((mask == output.agent_mask).all()):
        raise ValidationError("target agent mask disagrees with prediction mask")
    batch = mask.shape[0]
    fmask = mask.to(output.lane_log_probs.dtype)

    picked = output.lane_log_probs.gather(
        2, targets.lane_indices.unsqueeze(-1)).squeeze(-1)
    position = -(picked * fmask).sum() / batch

    attr_values = {
        "heading": targets.headings,
        "speed": targets.speeds,
        "size": targets.sizes,
        "shift": targets.shifts,
    }
    attr = output.lane_log_probs.new_zeros(())
    for name, gmm in output.attributes.items():
        log_prob = gmm.log_prob(attr_values[name])
        attr = attr - (log_prob * fmask).sum() / batch

    best = closest_mode_indices(output.trajectories, targets.trajectories)
    gather_index = best.unsqueeze(-1).unsqueeze(-1).unsqueeze(-1)
    gather_index = gather_index.expand(-1, -1, 1, *output.trajectories.shape[-2:])
    best_traj = output.trajectories.gather(2, gather_index).squeeze(2)
    sq_error = ((best_traj - targets.trajectories) ** 2).sum(dim=(-1, -2))
    best_log_prob = output.mode_log_probs.gather(2, best.unsqueeze(-1)).squeeze(-1)
    motion = (((-best_log_prob + sq_error) * fmask).sum()) / batch

    total = position + attr + motion
    breakdown = LossBreakdown(total=total, position=position, attr=attr, motion=motion)
    if not torch.isfinite(total):
        raise NonFiniteLossError(breakdown.detached())
    return breakdown
