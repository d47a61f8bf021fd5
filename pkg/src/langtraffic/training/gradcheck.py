"""Central finite-difference verification of the loss gradients.

Runs the model in double precision on a miniature configuration and
compares analytic parameter gradients against (f(x+h) - f(x-h)) / 2h,
coordinate by coordinate.
"""

from __future__ import annotations

import torch

from .losses import BatchTargets, compute_loss
from ..generator.config import GeneratorConfig
from ..generator.model import ScenarioGenerator, build_model

COMPONENTS = ("position", "attr", "motion")


def miniature_config() -> GeneratorConfig:
    return GeneratorConfig(d=8, mcg_blocks=2, transformer_layers=2, heads=4,
                           dropout=0.0, gmm_components=2, motion_modes=2,
                           attribute_mlp_width=16, max_lanes=4, max_agents=2,
                           horizon=5)


def random_batch(config: GeneratorConfig, seed: int = 0,
                 batch: int = 1) -> tuple[tuple[torch.Tensor, ...], BatchTargets]:
    gen = torch.Generator().manual_seed(seed)
    s, n, t = config.max_lanes, config.max_agents, config.horizon
    lane_feats = torch.randn((batch, s, 11), generator=gen, dtype=torch.float64)
    lane_mask = torch.ones((batch, s), dtype=torch.bool)
    codes = torch.randint(0, 8, (batch, n, 8), generator=gen)
    codes[..., 0] = torch.randint(1, 5, (batch, n), generator=gen)
    agent_mask = torch.ones((batch, n), dtype=torch.bool)
    targets = BatchTargets(
        lane_indices=torch.randint(0, s, (batch, n), generator=gen),
        headings=torch.randn((batch, n, 1), generator=gen, dtype=torch.float64),
        speeds=torch.randn((batch, n, 1), generator=gen, dtype=torch.float64).abs(),
        sizes=torch.randn((batch, n, 2), generator=gen, dtype=torch.float64).abs() + 1.0,
        shifts=torch.randn((batch, n, 2), generator=gen, dtype=torch.float64),
        trajectories=torch.randn((batch, n, t - 1, 3), generator=gen, dtype=torch.float64),
        agent_mask=agent_mask,
    )
    return (lane_feats, lane_mask, codes, agent_mask), targets


def max_gradient_error(model: ScenarioGenerator,
                       inputs: tuple[torch.Tensor, ...],
                       targets: BatchTargets,
                       component: str,
                       eps: float = 1e-5,
                       coords_per_tensor: int = 6,
                       seed: int = 0) -> float:
    """Largest relative disagreement between analytic and numeric gradients.

    Every parameter tensor is probed; small tensors exhaustively, large
    ones on a seeded sample of coordinates. The step size balances
    truncation against double-precision roundoff on O(10) loss values.
    """
    if component not in COMPONENTS:
        raise ValueError(f"component must be one of {COMPONENTS}")
    model = model.double().eval()

    def loss_value() -> torch.Tensor:
        return getattr(compute_loss(model(*inputs), targets), component)

    model.zero_grad(set_to_none=True)
    loss_value().backward()
    # Parameters a component never touches keep grad=None == zero.
    analytic = {name: (p.grad.detach().clone() if p.grad is not None
                       else torch.zeros_like(p))
                for name, p in model.named_parameters()}

    rng = torch.Generator().manual_seed(seed)
    worst = 0.0
    with torch.no_grad():
        for name, parameter in model.named_parameters():
            flat = parameter.view(-1)
            count = flat.numel()
            if count <= coords_per_tensor:
                coords = range(count)
            else:
                coords = torch.randperm(count, generator=rng)[:coords_per_tensor].tolist()
            for idx in coords:
                original = flat[idx].item()
                flat[idx] = original + eps
                upper = loss_value().item()
                flat[idx] = original - eps
                lower = loss_value().item()
                flat[idx] = original
                numeric = (upper - lower) / (2.0 * eps)
                exact = analytic[name].view(-1)[idx].item()
                scale = max(abs(exact), abs(numeric), 1e-6)
                worst = max(worst, abs(exact - numeric) / scale)
    return worst


def run_full_check(rel_tol: float = 1e-4, seed: int = 0) -> dict[str, float]:
    """Gradcheck all three loss components on the miniature configuration."""
    config = miniature_config()
    model = build_model(config, seed=seed).double()
    inputs, targets = random_batch(config, seed=seed)
    return {
        component: max_gradient_error(model, inputs, targets, component, seed=seed)
        for component in COMPONENTS
    }
