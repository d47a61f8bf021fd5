"""Seeded optimization loop over (scenario, code) pairs with JSONL metrics
and best/last checkpoints."""

from __future__ import annotations

import json
import logging
import math
import random
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .losses import BatchTargets, LossBreakdown, compute_loss
from .targets import TrainingTargets, extract_targets
from ..core.encoder import canonicalize, encode_scenario
from ..core.types import Scenario, StructuredScenario, ValidationError
from ..generator.checkpoint import save_checkpoint
from ..generator.config import GeneratorConfig
from ..generator.features import code_array, lane_features
from ..generator.model import ScenarioGenerator, build_model

logger = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    def __init__(self, batch_id: int, breakdown: dict[str, float]):
        super().__init__(f"non-finite loss in batch {batch_id}: {breakdown}")
        self.batch_id = batch_id


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 3e-4
    batch_size: int = 64
    epochs: int = 100
    seed: int = 0
    weight_decay: float = 0.01
    grad_clip: float = 1.0
    max_steps: int | None = None

    def __post_init__(self) -> None:
        if self.learning_rate < 0 or self.batch_size < 1 or self.epochs < 1:
            raise ValidationError("learning_rate must be >= 0; batch_size, epochs >= 1")


@dataclass
class Example:
    """One preprocessed training sample (canonical scenario, padded tensors)."""

    lane_feats: np.ndarray
    lane_mask: np.ndarray
    codes: np.ndarray
    agent_mask: np.ndarray
    targets: TrainingTargets
    scenario: Scenario
    code: StructuredScenario


@dataclass
class TrainResult:
    model: ScenarioGenerator
    metrics: list[dict]
    best_path: Path | None = None
    last_path: Path | None = None
    examples: list[Example] = field(default_factory=list)


def prepare_example(scenario: Scenario, code: StructuredScenario | None,
                    config: GeneratorConfig) -> Example:
    canon = canonicalize(scenario)
    if code is None:
        code = encode_scenario(scenario)
    if len(code.agents) != len(canon.agents):
        raise ValidationError("code and scenario disagree on agent count")
    feats, lane_mask = lane_features(canon.map, config.max_lanes)
    codes, agent_mask = code_array(code, config.max_agents)
    return Example(lane_feats=feats, lane_mask=lane_mask, codes=codes,
                   agent_mask=agent_mask, targets=extract_targets(canon),
                   scenario=canon, code=code)


def collate(examples: list[Example], config: GeneratorConfig,
            horizon: int) -> tuple[tuple[torch.Tensor, ...], BatchTargets]:
    b, n = len(examples), config.max_agents
    lane_feats = torch.as_tensor(np.stack([e.lane_feats for e in examples]))
    lane_mask = torch.as_tensor(np.stack([e.lane_mask for e in examples]))
    codes = torch.as_tensor(np.stack([e.codes for e in examples]))
    agent_mask = torch.as_tensor(np.stack([e.agent_mask for e in examples]))

    lane_idx = torch.zeros((b, n), dtype=torch.int64)
    headings = torch.zeros((b, n, 1))
    speeds = torch.zeros((b, n, 1))
    sizes = torch.zeros((b, n, 2))
    shifts = torch.zeros((b, n, 2))
    trajectories = torch.zeros((b, n, horizon - 1, 3))
    for i, example in enumerate(examples):
        count = example.targets.agent_count
        lane_idx[i, :count] = torch.as_tensor(example.targets.lane_indices)
        headings[i, :count] = torch.as_tensor(example.targets.headings, dtype=torch.float32)
        speeds[i, :count] = torch.as_tensor(example.targets.speeds, dtype=torch.float32)
        sizes[i, :count] = torch.as_tensor(example.targets.sizes, dtype=torch.float32)
        shifts[i, :count] = torch.as_tensor(example.targets.shifts, dtype=torch.float32)
        trajectories[i, :count] = torch.as_tensor(example.targets.trajectories,
                                                  dtype=torch.float32)

    targets = BatchTargets(lane_indices=lane_idx, headings=headings, speeds=speeds,
                           sizes=sizes, shifts=shifts, trajectories=trajectories,
                           agent_mask=agent_mask)
    return (lane_feats, lane_mask, codes, agent_mask), targets


def train(dataset: list[tuple[Scenario, StructuredScenario | None]],
          generator_config: GeneratorConfig,
          train_config: TrainConfig,
          out_dir: str | Path | None = None,
          model: ScenarioGenerator | None = None) -> TrainResult:
    """Run the optimization loop; reproducible for a fixed seed on one device."""
    if not dataset:
        raise ValidationError("empty training dataset")
    torch.manual_seed(train_config.seed)
    shuffler = random.Random(train_config.seed)

    examples = [prepare_example(s, c, generator_config) for s, c in dataset]
    horizon = generator_config.horizon
    if model is None:
        model = build_model(generator_config, seed=train_config.seed)
    optimizer = torch.optim.AdamW(model.parameters(), lr=train_config.learning_rate,
                                  weight_decay=train_config.weight_decay)

    out_path = Path(out_dir) if out_dir is not None else None
    metrics_file = None
    if out_path is not None:
        out_path.mkdir(parents=True, exist_ok=True)
        metrics_file = (out_path / "metrics.jsonl").open("w")

    metrics: list[dict] = []
    best_loss = math.inf
    best_path = out_path / "best.pt" if out_path else None
    last_path = out_path / "last.pt" if out_path else None
    step = 0
    start = time.monotonic()
    try:
        for epoch in range(train_config.epochs):
            order = list(range(len(examples)))
            shuffler.shuffle(order)
            model.train()
            sums = {"loss_total": 0.0, "loss_position": 0.0,
                    "loss_attr": 0.0, "loss_motion": 0.0}
            batches = 0
            for lo in range(0, len(order), train_config.batch_size):
                batch_ids = order[lo: lo + train_config.batch_size]
                inputs, targets = collate([examples[i] for i in batch_ids],
                                          generator_config, horizon)
                breakdown = _step(model, optimizer, inputs, targets,
                                  train_config.grad_clip, step)
                for key, value in breakdown.detached().items():
                    sums[key] += value
                batches += 1
                step += 1
                if train_config.max_steps is not None and step >= train_config.max_steps:
                    break
            record = {"epoch": epoch, **{k: v / batches for k, v in sums.items()},
                      "lr": train_config.learning_rate,
                      "wall_time": time.monotonic() - start}
            metrics.append(record)
            if metrics_file:
                metrics_file.write(json.dumps(record) + "\n")
                metrics_file.flush()
            if record["loss_total"] < best_loss and best_path is not None:
                best_loss = record["loss_total"]
                save_checkpoint(model, best_path, extra={"epoch": epoch,
                                                         "loss": record["loss_total"]})
            if train_config.max_steps is not None and step >= train_config.max_steps:
                break
    finally:
        if metrics_file:
            metrics_file.close()
    if last_path is not None:
        save_checkpoint(model, last_path, extra={"epoch": metrics[-1]["epoch"],
                                                 "loss": metrics[-1]["loss_total"]})
        if not (best_path and best_path.exists()):
            save_checkpoint(model, best_path, extra={"epoch": metrics[-1]["epoch"],
                                                     "loss": metrics[-1]["loss_total"]})
    return TrainResult(model=model, metrics=metrics, best_path=best_path,
                       last_path=last_path, examples=examples)


def _step(model: ScenarioGenerator, optimizer: torch.optim.Optimizer,
          inputs: tuple[torch.Tensor, ...], targets: BatchTargets,
          grad_clip: float, batch_id: int) -> LossBreakdown:
    from .losses import NonFiniteLossError

    optimizer.zero_grad(set_to_none=True)
    try:
        breakdown = compute_loss(model(*inputs), targets)
    except NonFiniteLossError as exc:
        raise TrainingDiverged(batch_id, exc.breakdown) from exc
    breakdown.total.backward()
    if grad_clip > 0:
        torch.nn.utils.clip_grad_norm_(model.parameters(), grad_clip)
    optimizer.step()
    return breakdown


@torch.no_grad()
def lane_placement_accuracy(model: ScenarioGenerator, examples: list[Example],
                            config: GeneratorConfig) -> float:
    """Fraction of agents whose argmax lane equals the ground-truth lane."""
    model.eval()
    correct = 0
    total = 0
    for example in examples:
        inputs, targets = collate([example], config, config.horizon)
        output = model(*inputs)
        picks = output.lane_log_probs.argmax(dim=-1)
        count = example.targets.agent_count
        correct += int((picks[0, :count] == targets.lane_indices[0, :count]).sum())
        total += count
    return correct / total if total else 0.0
