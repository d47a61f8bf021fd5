"""Tolerant parsing of model responses into structured scenario codes,
plus the canonical renderer used for prompts and fixtures."""

from __future__ import annotations

import re

from ..core.types import (
    DISTANCE_BIN_MAX,
    EDIT_DISTANCE_BIN_MAX,
    INTERSECTION_BIN_MAX,
    MAX_AGENTS,
    AgentAbstract,
    MapAbstract,
    StructuredScenario,
)

MAP_LANE_COUNT_MAX = 16
EGO_LANE_ID_MAX = 16

_BRACKET = re.compile(r"\[([^\]]*)\]")
_AGENT_MARKER = re.compile(r"\b(actor|agent|vehicle|car|v\d+)\b", re.IGNORECASE)
_MAP_MARKER = re.compile(r"\bmap\b", re.IGNORECASE)
_SUMMARY = re.compile(r"^\s*summary\s*:\s*(.*)$", re.IGNORECASE)


class BlockParseError(ValueError):
    """The response text does not contain a usable structured block."""


def _parse_int_list(body: str, where: str) -> list[int]:
    tokens = [t.strip() for t in body.split(",") if t.strip()]
    values = []
    for token in tokens:
        try:
            values.append(int(token))
        except ValueError:
            raise BlockParseError(f"{where}: non-integer token {token!r}") from None
    return values


def extract_vectors(raw: str) -> tuple[list[int], list[list[int]], str]:
    """Pull (map_vector, agent_vectors, summary) out of free-form text.

    A line contributes a vector when it carries a bracketed integer list
    and either names the map/an actor or consists of the list alone;
    narrative lines are ignored.
    """
    map_vec: list[int] | None = None
    agents: list[list[int]] = []
    summary_parts: list[str] = []
    for line in raw.splitlines():
        matched_summary = _SUMMARY.match(line)
        if matched_summary:
            summary_parts.append(matched_summary.group(1).strip())
            continue
        bracket = _BRACKET.search(line)
        if not bracket:
            continue
        outside = line[: bracket.start()] + line[bracket.end():]
        is_map_line = bool(_MAP_MARKER.search(outside))
        is_agent_line = bool(_AGENT_MARKER.search(outside))
        is_bare = not outside.strip(" \t:;,.'\"-*")
        if is_map_line and map_vec is None:
            map_vec = _parse_int_list(bracket.group(1), "map vector")
            if len(map_vec) != 6:
                raise BlockParseError(f"map vector must have 6 entries, got {len(map_vec)}")
        elif is_agent_line or is_bare:
            vec = _parse_int_list(bracket.group(1), f"agent vector {len(agents) + 1}")
            if len(vec) != 8:
                raise BlockParseError(
                    f"agent vector {len(agents) + 1} must have 8 entries, got {len(vec)}"
                )
            agents.append(vec)
    if map_vec is None:
        raise BlockParseError("no map vector found in response")
    return map_vec, agents, " ".join(summary_parts)


def _clamp(value: int, low: int, high: int, what: str, warnings: list[str]) -> int:
    if value < low or value > high:
        clamped = min(max(value, low), high)
        warnings.append(f"{what}={value} clamped to {clamped}")
        return clamped
    return value


def clamp_vectors(map_vec: list[int], agent_vecs: list[list[int]],
                  edit_mode: bool = False) -> tuple[StructuredScenario, list[str]]:
    """Force raw integer vectors into a valid StructuredScenario.

    Editing codes use 5-meter distance bins, so their distance dimension
    clamps at a higher ceiling than generation codes.
    """
    warnings: list[str] = []
    distance_max = EDIT_DISTANCE_BIN_MAX if edit_mode else DISTANCE_BIN_MAX

    lanes = tuple(
        _clamp(map_vec[i], 0, MAP_LANE_COUNT_MAX, f"map.lanes[{i}]", warnings)
        for i in range(4)
    )
    map_abstract = MapAbstract(
        lanes_by_direction=lanes,  # type: ignore[arg-type]
        intersection_distance_bin=_clamp(map_vec[4], 0, INTERSECTION_BIN_MAX,
                                         "map.intersection_bin", warnings),
        ego_lane_id=_clamp(map_vec[5], 1, EGO_LANE_ID_MAX, "map.ego_lane_id", warnings),
    )

    if len(agent_vecs) > MAX_AGENTS:
        warnings.append(f"agent count {len(agent_vecs)} clamped to {MAX_AGENTS}")
        agent_vecs = agent_vecs[:MAX_AGENTS]
    if not agent_vecs:
        warnings.append("no agent vectors in response; adding a default ego")
        agent_vecs = [[1, 0, 0, 0, 4, 4, 4, 4]]

    agents = []
    for i, vec in enumerate(agent_vecs):
        name = f"agent[{i}]"
        agents.append(AgentAbstract.from_ints([
            _clamp(vec[0], 1, 4, f"{name}.quadrant", warnings),
            _clamp(vec[1], 0, distance_max, f"{name}.distance_bin", warnings),
            _clamp(vec[2], 0, 3, f"{name}.orientation", warnings),
            _clamp(vec[3], 0, 7, f"{name}.speed_bin", warnings),
            *(_clamp(vec[4 + j], 0, 7, f"{name}.action[{j}]", warnings) for j in range(4)),
        ]))
    return StructuredScenario(map_abstract=map_abstract, agents=tuple(agents)), warnings


def parse_structured_block(raw: str, edit_mode: bool = False) -> StructuredScenario:
    """Parse a response into a valid code, clamping out-of-range integers."""
    map_vec, agent_vecs, _ = extract_vectors(raw)
    code, _ = clamp_vectors(map_vec, agent_vecs, edit_mode=edit_mode)
    return code


def render_structured_block(code: StructuredScenario, summary: str | None = None) -> str:
    """Canonical text form: one Map line plus one Actor line per agent."""
    lines = []
    if summary:
        lines.append(f"Summary: {summary}")
    lines.append(f"Map: {code.map_abstract.to_ints()}")
    for i, agent in enumerate(code.agents, start=1):
        lines.append(f"Actor V{i}: {agent.to_ints()}")
    return "\n".join(lines)
