"""Scene-realism and motion metrics.

MMD^2 over initialization attributes (biased V-statistic, Gaussian
kernel), Hungarian-matched displacement errors over relative
trajectories, and an oriented-box collision rate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core.encoder import to_ego_frame
from .core.types import AgentTrack, Scenario, ValidationError
from .core.serialization import deserialize


# ---------------------------------------------------------------------------
# Maximum mean discrepancy


def mmd_squared(x: np.ndarray, y: np.ndarray, bandwidth: float) -> float:
    """Biased MMD^2 estimate between two sample sets with a Gaussian kernel.

    Expectations include self-pairs (V-statistic); the result is clamped
    at zero against float cancellation.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if x.shape[0] == 0 or y.shape[0] == 0:
        raise ValidationError("mmd_squared needs non-empty sample sets")
    if x.ndim != 2 or y.ndim != 2 or x.shape[1] != y.shape[1]:
        raise ValidationError(f"feature dimensions differ: {x.shape} vs {y.shape}")
    if bandwidth <= 0:
        raise ValidationError(f"bandwidth must be positive, got {bandwidth}")

    def kernel_mean(a: np.ndarray, b: np.ndarray) -> float:
        sq = ((a[:, None, :] - b[None, :, :]) ** 2).sum(-1)
        return float(np.exp(-sq / (2.0 * bandwidth ** 2)).mean())

    value = kernel_mean(x, x) + kernel_mean(y, y) - 2.0 * kernel_mean(x, y)
    return max(0.0, value)


def median_heuristic_bandwidth(x: np.ndarray, y: np.ndarray) -> float:
    """Median pairwise distance over the pooled samples (floored for
    degenerate point clouds)."""
    pooled = np.concatenate([np.atleast_2d(np.asarray(x, dtype=float)),
                             np.atleast_2d(np.asarray(y, dtype=float))])
    diffs = pooled[:, None, :] - pooled[None, :, :]
    dists = np.sqrt((diffs ** 2).sum(-1))
    upper = dists[np.triu_indices(len(pooled), k=1)]
    if upper.size == 0:
        return 1.0
    return max(float(np.median(upper)), 1e-6)


# ---------------------------------------------------------------------------
# Motion errors


@dataclass(frozen=True)
class MotionErrors:
    made: float
    mfde: float
    matched: int
    surplus: int


def relative_positions(track: AgentTrack) -> np.ndarray:
    """(T-1, 2) positions of states 2..T in the agent's initial frame."""
    first = track.states[0]
    cos_h, sin_h = math.cos(first.heading), math.sin(first.heading)
    out = np.zeros((len(track.states) - 1, 2))
    for t, state in enumerate(track.states[1:]):
        px, py = state.x - first.x, state.y - first.y
        out[t] = (cos_h * px + sin_h * py, -sin_h * px + cos_h * py)
    return out


def motion_errors(generated: Scenario, reference: Scenario) -> MotionErrors:
    """Hungarian-match agents on ego-frame initial positions, then compare
    relative trajectories: mean displacement over t=2..T and final
    displacement. Working in each scenario's ego frame makes the result
    invariant to rigid transforms of either input."""
    if not generated.agents or not reference.agents:
        raise ValidationError("motion_errors needs at least one agent per scenario")
    if generated.horizon != reference.horizon:
        raise ValidationError("scenario horizons differ")
    generated = to_ego_frame(generated)
    reference = to_ego_frame(reference)

    gen_init = np.array([[a.states[0].x, a.states[0].y] for a in generated.agents])
    ref_init = np.array([[a.states[0].x, a.states[0].y] for a in reference.agents])
    cost = np.sqrt(((gen_init[:, None, :] - ref_init[None, :, :]) ** 2).sum(-1))
    rows, cols = linear_sum_assignment(cost)

    ades, fdes = [], []
    for i, j in zip(rows, cols):
        gen_rel = relative_positions(generated.agents[i])
        ref_rel = relative_positions(reference.agents[j])
        step_err = np.sqrt(((gen_rel - ref_rel) ** 2).sum(-1))
        ades.append(float(step_err.mean()))
        fdes.append(float(step_err[-1]))

    surplus = abs(len(generated.agents) - len(reference.agents))
    return MotionErrors(made=float(np.mean(ades)), mfde=float(np.mean(fdes)),
                        matched=len(rows), surplus=surplus)


# ---------------------------------------------------------------------------
# Collision rate


def box_corners(x: float, y: float, heading: float, length: float,
                width: float) -> np.ndarray:
    """Corners of an oriented rectangle, counterclockwise. (4, 2)."""
    c, s = math.cos(heading), math.sin(heading)
    hl, hw = length / 2.0, width / 2.0
    local = np.array([[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]])
    rot = np.array([[c, -s], [s, c]])
    return local @ rot.T + np.array([x, y])


def sat_margin(a: np.ndarray, b: np.ndarray) -> float:
    """Signed overlap of two oriented rectangles via the separating axis test.

    Positive: the minimum penetration depth across the four face axes.
    Negative: minus the largest separation along any face axis.
    """
    worst_overlap = math.inf
    best_gap = -math.inf
    for quad in (a, b):
        for k in range(2):
            edge = quad[(k + 1) % 4] - quad[k]
            axis = np.array([-edge[1], edge[0]])
            axis /= np.linalg.norm(axis)
            pa, pb = a @ axis, b @ axis
            overlap = min(pa.max(), pb.max()) - max(pa.min(), pb.min())
            if overlap < 0:
                best_gap = max(best_gap, -overlap)
            worst_overlap = min(worst_overlap, overlap)
    if best_gap > -math.inf:
        return -best_gap
    return worst_overlap


def boxes_collide(a: np.ndarray, b: np.ndarray) -> bool:
    return sat_margin(a, b) >= 0.0


def scenario_collision_rate(scenarios: list[Scenario]) -> float:
    """Mean over scenes of the fraction of vehicles whose box overlaps
    another vehicle's at any timestep."""
    if not scenarios:
        raise ValidationError("no scenarios to score")
    proportions = []
    for scenario in scenarios:
        n = len(scenario.agents)
        if n < 2:
            proportions.append(0.0)
            continue
        colliding = [False] * n
        radii = [math.hypot(tr.length, tr.width) / 2.0 for tr in scenario.agents]
        for t in range(scenario.horizon):
            boxes = []
            for track in scenario.agents:
                state = track.states[t]
                boxes.append(box_corners(state.x, state.y, state.heading,
                                         state.length, state.width))
            for i in range(n):
                for j in range(i + 1, n):
                    if colliding[i] and colliding[j]:
                        continue
                    si, sj = scenario.agents[i].states[t], scenario.agents[j].states[t]
                    if math.hypot(si.x - sj.x, si.y - sj.y) > radii[i] + radii[j]:
                        continue
                    if boxes_collide(boxes[i], boxes[j]):
                        colliding[i] = colliding[j] = True
        proportions.append(sum(colliding) / n)
    return float(np.mean(proportions))


# ---------------------------------------------------------------------------
# Dataset-level report


@dataclass(frozen=True)
class MetricReport:
    mmd_position: float
    mmd_heading: float
    mmd_speed: float
    mmd_size: float
    made: float
    mfde: float
    scr: float
    pairs: int
    matched_agents: int
    surplus_agents: int

    def __post_init__(self) -> None:
        values = [self.mmd_position, self.mmd_heading, self.mmd_speed,
                  self.mmd_size, self.made, self.mfde, self.scr]
        if any(not math.isfinite(v) or v < 0 for v in values):
            raise ValidationError(f"metric report has invalid values: {values}")
        if self.scr > 1.0:
            raise ValidationError(f"scr {self.scr} > 1")

    def to_dict(self) -> dict:
        return asdict(self)


def initialization_features(scenario: Scenario) -> dict[str, np.ndarray]:
    states = [track.states[0] for track in scenario.agents]
    return {
        "position": np.array([[s.x, s.y] for s in states]),
        "heading": np.array([[s.heading] for s in states]),
        "speed": np.array([[s.speed] for s in states]),
        "size": np.array([[s.length, s.width] for s in states]),
    }


def evaluate_pairs(pairs: list[tuple[Scenario, Scenario]],
                   bandwidth: float | str = "median") -> MetricReport:
    """Average per-pair MMDs plus aggregated motion and collision metrics.

    `bandwidth` is either a fixed kernel width or "median" for the
    per-pair median heuristic over the pooled samples.
    """
    if not pairs:
        raise ValidationError("no scenario pairs to evaluate")
    mmd_sums = {"position": 0.0, "heading": 0.0, "speed": 0.0, "size": 0.0}
    ade_values, fde_values = [], []
    matched = surplus = 0
    for generated, reference in pairs:
        gen_features = initialization_features(generated)
        ref_features = initialization_features(reference)
        for name in mmd_sums:
            x, y = gen_features[name], ref_features[name]
            sigma = (median_heuristic_bandwidth(x, y)
                     if bandwidth == "median" else float(bandwidth))
            mmd_sums[name] += mmd_squared(x, y, sigma)
        errors = motion_errors(generated, reference)
        ade_values.append(errors.made)
        fde_values.append(errors.mfde)
        matched += errors.matched
        surplus += errors.surplus

    n = len(pairs)
    return MetricReport(
        mmd_position=mmd_sums["position"] / n,
        mmd_heading=mmd_sums["heading"] / n,
        mmd_speed=mmd_sums["speed"] / n,
        mmd_size=mmd_sums["size"] / n,
        made=float(np.mean(ade_values)),
        mfde=float(np.mean(fde_values)),
        scr=scenario_collision_rate([g for g, _ in pairs]),
        pairs=n,
        matched_agents=matched,
        surplus_agents=surplus,
    )


def evaluate_dataset(pred_dir: str | Path, ref_dir: str | Path,
                     bandwidth: float | str = "median") -> MetricReport:
    """Score two directories of scenario documents paired by filename."""
    pred_path, ref_path = Path(pred_dir), Path(ref_dir)
    pred_files = {p.name: p for p in sorted(pred_path.glob("*.json"))}
    ref_files = {p.name: p for p in sorted(ref_path.glob("*.json"))}
    orphans = sorted(set(pred_files) ^ set(ref_files))
    if orphans:
        raise ValidationError(f"unpaired scenario files: {orphans}")
    if not pred_files:
        raise ValidationError("no scenario documents found")
    pairs = [
        (deserialize(pred_files[name].read_bytes()),
         deserialize(ref_files[name].read_bytes()))
        for name in sorted(pred_files)
    ]
    return evaluate_pairs(pairs, bandwidth=bandwidth)


def write_report(report: MetricReport, path: str | Path,
                 bandwidth: float | str = "median") -> None:
    payload = report.to_dict()
    payload["bandwidth_policy"] = bandwidth
    Path(path).write_text(json.dumps(payload, indent=2))
