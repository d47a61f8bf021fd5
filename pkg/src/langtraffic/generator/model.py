"""Query-based scenario generator.

Lane features flow through gated max-pool context blocks; per-agent
queries (sinusoidal code embedding + learnable slot) pass through
self-attention and cross-attention to the lanes; heads decode a lane
distribution, mixture parameters per attribute, and multi-mode motion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import Tensor, nn

from .config import (
    ATTRIBUTE_DIMS,
    CODE_DIM,
    LANE_FEATURE_DIM,
    LOGIT_CLAMP,
    VARIANCE_FLOOR,
    GeneratorConfig,
)
from ..core.types import ValidationError


def _mlp(d_in: int, d_hidden: int, d_out: int) -> nn.Sequential:
    return nn.Sequential(nn.Linear(d_in, d_hidden), nn.GELU(), nn.Linear(d_hidden, d_out))


def bound_logits(x: Tensor, bound: float = LOGIT_CLAMP) -> Tensor:
    """Smoothly bound logits to (-bound, bound).

    A hard clamp zeroes the gradient once a logit saturates, which froze
    lane heads mid-training; tanh keeps them trainable at any magnitude.
    """
    return bound * torch.tanh(x / bound)


def masked_max_pool(x: Tensor, mask: Tensor) -> Tensor:
    """Max over the set dimension, ignoring masked rows. x: (B,S,d), mask: (B,S)."""
    if not bool(mask.any(dim=1).all()):
        raise ValidationError("max pool over a fully masked row")
    filled = x.masked_fill(~mask.unsqueeze(-1), float("-inf"))
    return filled.max(dim=1).values


class ContextGate(nn.Module):
    """Elementwise product of a per-row branch and a pooled-context branch."""

    def __init__(self, d: int):
        super().__init__()
        self.row_mlp = _mlp(d, d, d)
        self.context_mlp = _mlp(d, d, d)

    def forward(self, x: Tensor, mask: Tensor) -> Tensor:
        context = masked_max_pool(x, mask)
        return self.row_mlp(x) * self.context_mlp(context).unsqueeze(1)


class McgBlock(nn.Module):
    """Context gate wrapped with a residual connection and layer norm."""

    def __init__(self, d: int):
        super().__init__()
        self.gate = ContextGate(d)
        self.norm = nn.LayerNorm(d)

    def forward(self, x: Tensor, mask: Tensor) -> Tensor:
        return self.norm(x + self.gate(x, mask))


class SinusoidalCodeEncoder(nn.Module):
    """Embed each of the 8 integer code fields with d/8 sinusoid channels."""

    def __init__(self, d: int, base: float = 10000.0):
        super().__init__()
        self.per_field = d // CODE_DIM
        exponents = torch.arange(self.per_field) // 2 * 2
        self.register_buffer("inv_freq", base ** (-exponents / self.per_field),
                             persistent=False)

    def forward(self, codes: Tensor) -> Tensor:
        # codes: (..., 8) integer -> (..., 8 * per_field)
        phase = codes.unsqueeze(-1).to(self.inv_freq.dtype) * self.inv_freq
        encoded = torch.where(
            torch.arange(self.per_field, device=codes.device) % 2 == 0,
            torch.sin(phase), torch.cos(phase),
        )
        return encoded.flatten(-2)


class QueryBuilder(nn.Module):
    """q_i = MLP(PE(code_i)) + MLP(slot_i) with one learnable slot per agent."""

    def __init__(self, config: GeneratorConfig):
        super().__init__()
        self.encoder = SinusoidalCodeEncoder(config.d)
        self.code_mlp = _mlp(config.d, config.d, config.d)
        self.slots = nn.Parameter(torch.randn(config.max_agents, config.d) * 0.02)
        self.slot_mlp = _mlp(config.d, config.d, config.d)

    def forward(self, codes: Tensor) -> Tensor:
        n = codes.shape[-2]
        if n > self.slots.shape[0]:
            raise ValidationError(f"{n} agents exceed the {self.slots.shape[0]} query slots")
        return self.code_mlp(self.encoder(codes)) + self.slot_mlp(self.slots[:n])


class InteractionLayer(nn.Module):
    """Self-attention over agent queries, then cross-attention to lanes."""

    def __init__(self, d: int, heads: int, dropout: float):
        super().__init__()
        self.self_attn = nn.MultiheadAttention(d, heads, batch_first=True)
        self.cross_attn = nn.MultiheadAttention(d, heads, batch_first=True)
        self.norm1 = nn.LayerNorm(d)
        self.norm2 = nn.LayerNorm(d)
        self.dropout = nn.Dropout(dropout)

    def forward(self, q: Tensor, lanes: Tensor, lane_mask: Tensor,
                agent_mask: Tensor) -> Tensor:
        attended, _ = self.self_attn(q, q, q, key_padding_mask=~agent_mask,
                                     need_weights=False)
        q = self.norm1(q + self.dropout(attended))
        attended, _ = self.cross_attn(q, lanes, lanes, key_padding_mask=~lane_mask,
                                      need_weights=False)
        return self.norm2(q + self.dropout(attended))


@dataclass
class GmmParams:
    """Diagonal Gaussian mixture for one attribute. Shapes: means and
    variances (B, N, K, dim), weights (B, N, K)."""

    means: Tensor
    variances: Tensor
    log_weights: Tensor

    @property
    def weights(self) -> Tensor:
        return self.log_weights.exp()

    def log_prob(self, value: Tensor) -> Tensor:
        """Log density at value (B, N, dim) -> (B, N)."""
        diff = value.unsqueeze(-2) - self.means
        component = -0.5 * (
            (diff * diff / self.variances).sum(-1)
            + self.variances.log().sum(-1)
            + self.means.shape[-1] * math.log(2.0 * math.pi)
        )
        return torch.logsumexp(self.log_weights + component, dim=-1)


@dataclass
class GeneratorOutput:
    """Batched decoder outputs; padded rows are masked out everywhere."""

    lane_log_probs: Tensor            # (B, N, S)
    attributes: dict[str, GmmParams]  # heading, speed, size, shift
    trajectories: Tensor              # (B, N, K', T-1, 3) agent-local (x, y, theta)
    mode_log_probs: Tensor            # (B, N, K')
    agent_embeddings: Tensor          # (B, N, d)
    lane_embeddings: Tensor           # (B, S, d)
    lane_mask: Tensor                 # (B, S) bool
    agent_mask: Tensor                # (B, N) bool

    @property
    def lane_probs(self) -> Tensor:
        probs = self.lane_log_probs.exp()
        return probs * self.lane_mask.unsqueeze(1)

    @property
    def mode_probs(self) -> Tensor:
        return self.mode_log_probs.exp()


class AttributeHead(nn.Module):
    def __init__(self, d: int, width: int, components: int, dim: int):
        super().__init__()
        self.components = components
        self.dim = dim
        self.mlp = _mlp(d, width, components * (2 * dim + 1))

    def forward(self, q: Tensor) -> GmmParams:
        raw = self.mlp(q)
        k, dim = self.components, self.dim
        means = raw[..., : k * dim].reshape(*raw.shape[:-1], k, dim)
        raw_var = raw[..., k * dim: 2 * k * dim].reshape(*raw.shape[:-1], k, dim)
        logits = bound_logits(raw[..., 2 * k * dim:])
        return GmmParams(
            means=means,
            variances=nn.functional.softplus(raw_var) + VARIANCE_FLOOR,
            log_weights=torch.log_softmax(logits, dim=-1),
        )


class MotionHead(nn.Module):
    """Emits K' trajectories as per-step deltas, integrated over time so the
    output scale stays trainable, plus per-mode probabilities."""

    def __init__(self, d: int, width: int, modes: int, horizon: int):
        super().__init__()
        self.modes = modes
        self.steps = horizon - 1
        self.mlp = _mlp(d, width, modes * self.steps * 3 + modes)

    def forward(self, q: Tensor) -> tuple[Tensor, Tensor]:
        raw = self.mlp(q)
        split = self.modes * self.steps * 3
        deltas = raw[..., :split].reshape(*raw.shape[:-1], self.modes, self.steps, 3)
        trajectories = deltas.cumsum(dim=-2)
        logits = bound_logits(raw[..., split:])
        return trajectories, torch.log_softmax(logits, dim=-1)


class ScenarioGenerator(nn.Module):
    def __init__(self, config: GeneratorConfig):
        super().__init__()
        self.config = config
        d = config.d
        self.lane_proj = nn.Linear(LANE_FEATURE_DIM, d)
        self.mcg_blocks = nn.ModuleList(McgBlock(d) for _ in range(config.mcg_blocks))
        self.query_builder = QueryBuilder(config)
        self.layers = nn.ModuleList(
            InteractionLayer(d, config.heads, config.dropout)
            for _ in range(config.transformer_layers)
        )
        self.agent_embed = _mlp(d, d, d)
        self.lane_embed = _mlp(d, d, d)
        self.attribute_heads = nn.ModuleDict({
            name: AttributeHead(d, config.attribute_mlp_width, config.gmm_components, dim)
            for name, dim in ATTRIBUTE_DIMS.items()
        })
        self.motion_head = MotionHead(d, config.attribute_mlp_width,
                                      config.motion_modes, config.horizon)

    def encode_map(self, lane_feats: Tensor, lane_mask: Tensor) -> Tensor:
        """(B, S, 11) raw lane features -> (B, S, d), masked rows zeroed."""
        if lane_feats.shape[1] > self.config.max_lanes:
            raise ValidationError(
                f"{lane_feats.shape[1]} lanes exceed max_lanes={self.config.max_lanes}")
        if not bool(lane_mask.any(dim=1).all()):
            raise ValidationError("a batch row has no unmasked lanes")
        x = self.lane_proj(lane_feats)
        for block in self.mcg_blocks:
            x = block(x, lane_mask)
        return x * lane_mask.unsqueeze(-1)

    def build_queries(self, codes: Tensor) -> Tensor:
        """(B, N, 8) integer codes -> (B, N, d) agent queries."""
        return self.query_builder(codes)

    def decode_agents(self, queries: Tensor, lane_features: Tensor,
                      lane_mask: Tensor, agent_mask: Tensor) -> GeneratorOutput:
        q = queries
        for layer in self.layers:
            q = layer(q, lane_features, lane_mask, agent_mask)

        agent_e = self.agent_embed(q)
        lane_e = self.lane_embed(lane_features)
        logits = bound_logits(torch.einsum("bnd,bsd->bns", agent_e, lane_e))
        logits = logits.masked_fill(~lane_mask.unsqueeze(1), float("-inf"))
        lane_log_probs = torch.log_softmax(logits, dim=-1)

        attributes = {name: head(q) for name, head in self.attribute_heads.items()}
        trajectories, mode_log_probs = self.motion_head(q)
        return GeneratorOutput(
            lane_log_probs=lane_log_probs,
            attributes=attributes,
            trajectories=trajectories,
            mode_log_probs=mode_log_probs,
            agent_embeddings=agent_e,
            lane_embeddings=lane_e,
            lane_mask=lane_mask,
            agent_mask=agent_mask,
        )

    def forward(self, lane_feats: Tensor, lane_mask: Tensor, codes: Tensor,
                agent_mask: Tensor) -> GeneratorOutput:
        lanes = self.encode_map(lane_feats, lane_mask)
        queries = self.build_queries(codes)
        return self.decode_agents(queries, lanes, lane_mask, agent_mask)


def build_model(config: GeneratorConfig, seed: int = 0) -> ScenarioGenerator:
    """Deterministically initialized generator."""
    generator_state = torch.random.get_rng_state()
    try:
        torch.manual_seed(seed)
        return ScenarioGenerator(config)
    finally:
        torch.random.set_rng_state(generator_state)
