"""Canonical JSON interchange for scenarios and structured codes.

Serialization is canonical (fixed key order, shortest round-trip floats),
so serialize(deserialize(doc)) reproduces a serialized document byte for
byte and deserialize(serialize(s)) == s for every valid scenario.
"""

from __future__ import annotations

import json
from typing import Any

from .types import (
    FPS,
    AgentState,
    AgentTrack,
    LaneSegment,
    LaneType,
    LightState,
    MapRegion,
    Scenario,
    StructuredScenario,
    MapAbstract,
    AgentAbstract,
    ValidationError,
)


class ParseError(ValueError):
    """The document is not well-formed JSON or has the wrong shape."""


def _field(obj: dict, key: str, kind: type | tuple[type, ...], where: str) -> Any:
    if key not in obj:
        raise ValidationError(f"{where}: missing field '{key}'")
    value = obj[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ValidationError(f"{where}: field '{key}' has wrong type {type(value).__name__}")
    return value


def _point(obj: dict, key: str, where: str) -> tuple[float, float]:
    raw = _field(obj, key, list, where)
    if len(raw) != 2 or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw):
        raise ValidationError(f"{where}: field '{key}' must be [x, y]")
    return (float(raw[0]), float(raw[1]))


def scenario_to_document(scenario: Scenario) -> dict:
    return {
        "fps": FPS,
        "map": {
            "region_id": scenario.map.region_id,
            "center": list(scenario.map.center),
            "lanes": [
                {
                    "id": lane.id,
                    "start": list(lane.start),
                    "end": list(lane.end),
                    "type": lane.lane_type.value,
                    "light": lane.light.value,
                }
                for lane in scenario.map.lanes
            ],
        },
        "agents": [
            {
                "id": track.agent_id,
                "length": track.length,
                "width": track.width,
                "states": [
                    {"x": s.x, "y": s.y, "heading": s.heading, "speed": s.speed}
                    for s in track.states
                ],
            }
            for track in scenario.agents
        ],
        "ego_index": scenario.ego_index,
    }


def scenario_from_document(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ParseError(f"scenario document must be an object, got {type(doc).__name__}")
    fps = _field(doc, "fps", int, "document")
    if fps != FPS:
        raise ValidationError(f"document: fps must be {FPS}, got {fps}")

    map_obj = _field(doc, "map", dict, "document")
    lanes = []
    for i, lane_obj in enumerate(_field(map_obj, "lanes", list, "map")):
        where = f"map.lanes[{i}]"
        if not isinstance(lane_obj, dict):
            raise ValidationError(f"{where}: must be an object")
        try:
            lane_type = LaneType(_field(lane_obj, "type", str, where))
            light = LightState(_field(lane_obj, "light", str, where))
        except ValueError as exc:
            raise ValidationError(f"{where}: {exc}") from exc
        lanes.append(
            LaneSegment(
                id=_field(lane_obj, "id", int, where),
                start=_point(lane_obj, "start", where),
                end=_point(lane_obj, "end", where),
                lane_type=lane_type,
                light=light,
            )
        )
    region = MapRegion(
        lanes=tuple(lanes),
        region_id=_field(map_obj, "region_id", str, "map"),
        center=_point(map_obj, "center", "map"),
    )

    tracks = []
    for i, agent_obj in enumerate(_field(doc, "agents", list, "document")):
        where = f"agents[{i}]"
        if not isinstance(agent_obj, dict):
            raise ValidationError(f"{where}: must be an object")
        length = _field(agent_obj, "length", float, where)
        width = _field(agent_obj, "width", float, where)
        states = []
        for t, state_obj in enumerate(_field(agent_obj, "states", list, where)):
            swhere = f"{where}.states[{t}]"
            if not isinstance(state_obj, dict):
                raise ValidationError(f"{swhere}: must be an object")
            states.append(
                AgentState(
                    x=_field(state_obj, "x", float, swhere),
                    y=_field(state_obj, "y", float, swhere),
                    heading=_field(state_obj, "heading", float, swhere),
                    speed=_field(state_obj, "speed", float, swhere),
                    length=length,
                    width=width,
                )
            )
        tracks.append(AgentTrack(agent_id=_field(agent_obj, "id", int, where),
                                 states=tuple(states)))

    return Scenario(
        map=region,
        agents=tuple(tracks),
        ego_index=_field(doc, "ego_index", int, "document"),
    )


def serialize(scenario: Scenario) -> bytes:
    return json.dumps(scenario_to_document(scenario), separators=(",", ":")).encode("utf-8")


def deserialize(data: bytes | str) -> Scenario:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return scenario_from_document(doc)


def structured_to_document(code: StructuredScenario) -> dict:
    return {
        "map": code.map_abstract.to_ints(),
        "agents": [agent.to_ints() for agent in code.agents],
    }


def structured_from_document(doc: dict) -> StructuredScenario:
    if not isinstance(doc, dict):
        raise ParseError("structured document must be an object")
    map_vec = _field(doc, "map", list, "structured")
    agents = _field(doc, "agents", list, "structured")
    return StructuredScenario(
        map_abstract=MapAbstract.from_ints(map_vec),
        agents=tuple(AgentAbstract.from_ints(vec) for vec in agents),
    )


def serialize_structured(code: StructuredScenario) -> bytes:
    return json.dumps(structured_to_document(code), separators=(",", ":")).encode("utf-8")


def deserialize_structured(data: bytes | str) -> StructuredScenario:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return structured_from_document(doc)
