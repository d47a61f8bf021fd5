"""Deterministic offline interpreter for attribute-style descriptions.

Covers four clause families — sparsity, position, speed, and ego motion —
and maps them to a structured code through the fixed table below. Anything
outside the grammar raises, pointing the caller at the supported clauses.

Clause -> value table:
  sparsity   "nearly empty" -> 2 agents, "sparse" -> 6, "medium density" -> 12,
             "dense" / "very dense" -> 24; default 6.
  position   "left" -> quadrants {2,3}, "right" -> {1,4}, "front" -> {1,2},
             "back" -> {3,4}; compounds like "front left" pick the single
             quadrant; "different sides" -> all quadrants; default all.
  speed      "slow" -> bin 0, "medium" -> 2, "fast" -> 4; "stopping" -> bin 0
             with stop actions; default bin 1.
  ego motion "stops" -> stop actions + speed 0, "moves straight" -> forward,
             "turns left"/"turns right" -> turn in the first two seconds.
  defaults   non-ego quadrants round-robin over the allowed set, distance
             bins cycle 1,2,3,0, orientation north, actions forward;
             map code fixed at [2, 2, 2, 2, 2, 1].
"""

from __future__ import annotations

import re

from ..core.types import (
    Action,
    AgentAbstract,
    MapAbstract,
    Orientation,
    StructuredScenario,
)

SPARSITY_AGENTS = {
    "nearly empty": 2,
    "sparse": 6,
    "medium": 12,
    "dense": 24,
}
SPEED_BINS = {"slow": 0, "medium": 2, "fast": 4}
SIDE_QUADRANTS = {
    "left": (2, 3),
    "right": (1, 4),
    "front": (1, 2),
    "back": (3, 4),
}
COMPOUND_QUADRANTS = {
    ("front", "right"): (1,),
    ("front", "left"): (2,),
    ("back", "left"): (3,),
    ("back", "right"): (4,),
}
DEFAULT_SPEED_BIN = 1
DEFAULT_MAP = MapAbstract(lanes_by_direction=(2, 2, 2, 2),
                          intersection_distance_bin=2, ego_lane_id=1)

_SPARSITY = re.compile(
    r"(?:scenario|scene)\s+is\s+(nearly empty|sparse|(?:with\s+)?medium(?:\s+density)?|very dense|dense)")
_SPEED = re.compile(
    r"most cars are (?:moving|driving)\s+(?:in|at)\s+(?:a\s+)?(slow|medium|fast)\s+speed")
_STOPPING = re.compile(r"most cars are stopp(?:ing|ed)")
_POSITION = re.compile(
    r"(?:only\s+)?vehicles\s+(?:are\s+)?on\s+(?:the\s+)?([a-z ,/and]+?)\s+sides?\b")
_DIFFERENT_SIDES = re.compile(r"vehicles on different sides")
_EGO = re.compile(
    r"(?:center car|ego(?:\s+(?:car|vehicle))?)\s+(stops|moves straight|turns left|turns right)")

EGO_ACTIONS = {
    "stops": (Action.STOP,) * 4,
    "moves straight": (Action.FORWARD,) * 4,
    "turns left": (Action.TURN_LEFT, Action.TURN_LEFT, Action.FORWARD, Action.FORWARD),
    "turns right": (Action.TURN_RIGHT, Action.TURN_RIGHT, Action.FORWARD, Action.FORWARD),
}


class GrammarError(ValueError):
    """The text contains no clause of the attribute grammar."""


def _quadrants_from_sides(phrase: str) -> tuple[int, ...]:
    words = tuple(w for w in re.split(r"[ ,/]|and", phrase) if w in SIDE_QUADRANTS)
    if len(words) == 2 and tuple(sorted(words)) in {tuple(sorted(k)) for k in COMPOUND_QUADRANTS}:
        for key, quads in COMPOUND_QUADRANTS.items():
            if sorted(key) == sorted(words):
                return quads
    quadrants: list[int] = []
    for w in words:
        quadrants.extend(q for q in SIDE_QUADRANTS[w] if q not in quadrants)
    return tuple(sorted(quadrants)) if quadrants else (1, 2, 3, 4)


def fallback_interpret(text: str) -> StructuredScenario:
    """Map an attribute-style description to a code, deterministically."""
    lowered = text.lower()
    matched = False

    agent_count = 6
    sparsity = _SPARSITY.search(lowered)
    if sparsity:
        matched = True
        term = sparsity.group(1)
        if "empty" in term:
            agent_count = SPARSITY_AGENTS["nearly empty"]
        elif "sparse" in term:
            agent_count = SPARSITY_AGENTS["sparse"]
        elif "medium" in term:
            agent_count = SPARSITY_AGENTS["medium"]
        else:
            agent_count = SPARSITY_AGENTS["dense"]

    quadrants: tuple[int, ...] = (1, 2, 3, 4)
    if _DIFFERENT_SIDES.search(lowered):
        matched = True
    else:
        position = _POSITION.search(lowered)
        if position:
            matched = True
            quadrants = _quadrants_from_sides(position.group(1))

    speed_bin = DEFAULT_SPEED_BIN
    everyone_stops = False
    speed = _SPEED.search(lowered)
    if speed:
        matched = True
        speed_bin = SPEED_BINS[speed.group(1)]
    elif _STOPPING.search(lowered):
        matched = True
        speed_bin = 0
        everyone_stops = True

    ego_actions = (Action.FORWARD,) * 4
    ego_speed_bin = speed_bin
    ego = _EGO.search(lowered)
    if ego:
        matched = True
        ego_actions = EGO_ACTIONS[ego.group(1)]
        if ego.group(1) == "stops":
            ego_speed_bin = 0
    if everyone_stops and not ego:
        ego_actions = (Action.STOP,) * 4

    if not matched:
        raise GrammarError(
            "no recognizable clause; supported forms: 'the scenario is "
            "{nearly empty|sparse|with medium density|very dense}', 'there are "
            "(only) vehicles on the {left|right|front|back} side(s)', 'vehicles "
            "on different sides', 'most cars are moving in {slow|medium|fast} "
            "speed', 'most cars are stopping', 'the center car "
            "{stops|moves straight|turns left|turns right}'"
        )

    default_actions = (Action.STOP,) * 4 if everyone_stops else (Action.FORWARD,) * 4
    agents = [AgentAbstract(
        quadrant=1, distance_bin=0, orientation=Orientation.NORTH,
        speed_bin=ego_speed_bin, actions=ego_actions,
    )]
    for i in range(max(0, agent_count - 1)):
        agents.append(AgentAbstract(
            quadrant=quadrants[i % len(quadrants)],
            distance_bin=(i % 4 + 1) % 4,
            orientation=Orientation.NORTH,
            speed_bin=speed_bin,
            actions=default_actions,
        ))
    return StructuredScenario(map_abstract=DEFAULT_MAP, agents=tuple(agents))
