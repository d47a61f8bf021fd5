"""Domain types for traffic scenarios, maps, and their integer abstractions.

All types are immutable value objects validated at construction; every
operation on them elsewhere in the package is a pure function.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .geometry import Point, distance, wrap_angle

FPS = 10
HORIZON = 50          # timesteps per scenario (5 s at 10 fps)
MAX_AGENTS = 32
MAX_LANES = 384

DISTANCE_BIN_METERS = 20.0
DISTANCE_BIN_MAX = 7
EDIT_DISTANCE_BIN_METERS = 5.0
EDIT_DISTANCE_BIN_MAX = 31
SPEED_BIN_MPS = 2.5
SPEED_BIN_MAX = 7
INTERSECTION_BIN_METERS = 5.0
INTERSECTION_BIN_MAX = 15


class ValidationError(ValueError):
    """A domain object or document violates its invariants."""


class LaneType(enum.Enum):
    CENTER = "center"
    EDGE = "edge"
    BOUNDARY = "boundary"


class LightState(enum.Enum):
    NONE = "none"
    RED = "red"
    YELLOW = "yellow"
    GREEN = "green"


class Orientation(enum.IntEnum):
    """Compass sector of a heading in the ego frame (+x is north)."""

    NORTH = 0
    SOUTH = 1
    EAST = 2
    WEST = 3


class Action(enum.IntEnum):
    """One-second maneuver labels used in the agent abstraction."""

    LANE_CHANGE_LEFT = 0
    LANE_CHANGE_RIGHT = 1
    TURN_LEFT = 2
    TURN_RIGHT = 3
    FORWARD = 4
    ACCELERATE = 5
    DECELERATE = 6
    STOP = 7


@dataclass(frozen=True)
class LaneSegment:
    """A map primitive: a straight lane piece with type and light state."""

    id: int
    start: Point
    end: Point
    lane_type: LaneType = LaneType.CENTER
    light: LightState = LightState.NONE

    def __post_init__(self) -> None:
        object.__setattr__(self, "start", (float(self.start[0]), float(self.start[1])))
        object.__setattr__(self, "end", (float(self.end[0]), float(self.end[1])))
        if self.start == self.end:
            raise ValidationError(f"lane {self.id}: start equals end {self.start}")
        if not isinstance(self.lane_type, LaneType):
            raise ValidationError(f"lane {self.id}: bad lane_type {self.lane_type!r}")
        if not isinstance(self.light, LightState):
            raise ValidationError(f"lane {self.id}: bad light {self.light!r}")


@dataclass(frozen=True)
class MapRegion:
    """A local map: up to MAX_LANES lane segments around a center point."""

    lanes: tuple[LaneSegment, ...]
    region_id: str = "region"
    center: Point = (0.0, 0.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        if not 1 <= len(self.lanes) <= MAX_LANES:
            raise ValidationError(
                f"region {self.region_id}: lane count {len(self.lanes)} outside [1, {MAX_LANES}]"
            )
        ids = [lane.id for lane in self.lanes]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"region {self.region_id}: duplicate lane ids")

    def center_lanes(self) -> tuple[LaneSegment, ...]:
        return tuple(l for l in self.lanes if l.lane_type is LaneType.CENTER)


@dataclass(frozen=True)
class AgentState:
    """Pose, speed, and footprint of one vehicle at one timestep."""

    x: float
    y: float
    heading: float
    speed: float
    length: float
    width: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "heading", wrap_angle(float(self.heading)))
        object.__setattr__(self, "speed", float(self.speed))
        object.__setattr__(self, "length", float(self.length))
        object.__setattr__(self, "width", float(self.width))
        if self.speed < 0:
            raise ValidationError(f"negative speed {self.speed}")
        if self.length <= 0 or self.width <= 0:
            raise ValidationError(f"non-positive size {self.length}x{self.width}")

    @property
    def position(self) -> Point:
        return (self.x, self.y)


@dataclass(frozen=True)
class AgentTrack:
    """One vehicle's state sequence over the scenario horizon."""

    agent_id: int
    states: tuple[AgentState, ...]

    def __post_init__(self) -> None:
        if len(self.states) != HORIZON:
            raise ValidationError(
                f"agent {self.agent_id}: {len(self.states)} states, expected {HORIZON}"
            )
        first = self.states[0]
        for s in self.states:
            if s.length != first.length or s.width != first.width:
                raise ValidationError(f"agent {self.agent_id}: size changes over time")

    @property
    def length(self) -> float:
        return self.states[0].length

    @property
    def width(self) -> float:
        return self.states[0].width


@dataclass(frozen=True)
class Scenario:
    """A map region plus per-agent state sequences over HORIZON timesteps."""

    map: MapRegion
    agents: tuple[AgentTrack, ...]
    ego_index: int = 0

    def __post_init__(self) -> None:
        if not 1 <= len(self.agents) <= MAX_AGENTS:
            raise ValidationError(
                f"agent count {len(self.agents)} outside [1, {MAX_AGENTS}]"
            )
        if not 0 <= self.ego_index < len(self.agents):
            raise ValidationError(f"ego_index {self.ego_index} out of range")

    @property
    def ego(self) -> AgentTrack:
        return self.agents[self.ego_index]

    @property
    def horizon(self) -> int:
        return len(self.agents[0].states)


@dataclass(frozen=True)
class MapAbstract:
    """6-integer summary of a local map: lanes per compass direction,
    distance-to-intersection bin, and the ego lane id (1 = rightmost)."""

    lanes_by_direction: tuple[int, int, int, int]  # north, south, east, west
    intersection_distance_bin: int
    ego_lane_id: int

    def __post_init__(self) -> None:
        if any(n < 0 for n in self.lanes_by_direction):
            raise ValidationError("negative lane count")
        if self.intersection_distance_bin < 0:
            raise ValidationError("negative intersection bin")
        if self.ego_lane_id < 1:
            raise ValidationError(f"ego_lane_id {self.ego_lane_id} < 1")

    def to_ints(self) -> list[int]:
        return [*self.lanes_by_direction, self.intersection_distance_bin, self.ego_lane_id]

    @classmethod
    def from_ints(cls, values: list[int] | tuple[int, ...]) -> "MapAbstract":
        if len(values) != 6:
            raise ValidationError(f"map abstract needs 6 integers, got {len(values)}")
        return cls(
            lanes_by_direction=(int(values[0]), int(values[1]), int(values[2]), int(values[3])),
            intersection_distance_bin=int(values[4]),
            ego_lane_id=int(values[5]),
        )


@dataclass(frozen=True)
class AgentAbstract:
    """8-integer summary of one agent relative to the ego vehicle.

    Quadrant 1 is front-right, 2 front-left, 3 back-left, 4 back-right.
    Actions cover the next four seconds, one label per second.
    """

    quadrant: int
    distance_bin: int
    orientation: Orientation
    speed_bin: int
    actions: tuple[Action, Action, Action, Action]

    def __post_init__(self) -> None:
        if self.quadrant not in (1, 2, 3, 4):
            raise ValidationError(f"quadrant {self.quadrant} outside 1-4")
        if self.distance_bin < 0:
            raise ValidationError(f"negative distance_bin {self.distance_bin}")
        if self.speed_bin < 0:
            raise ValidationError(f"negative speed_bin {self.speed_bin}")
        if len(self.actions) != 4:
            raise ValidationError(f"{len(self.actions)} actions, expected 4")
        if not isinstance(self.orientation, Orientation):
            raise ValidationError(f"bad orientation {self.orientation!r}")
        for a in self.actions:
            if not isinstance(a, Action):
                raise ValidationError(f"bad action {a!r}")

    def to_ints(self) -> list[int]:
        return [
            self.quadrant,
            self.distance_bin,
            int(self.orientation),
            self.speed_bin,
            *(int(a) for a in self.actions),
        ]

    @classmethod
    def from_ints(cls, values: list[int] | tuple[int, ...]) -> "AgentAbstract":
        if len(values) != 8:
            raise ValidationError(f"agent abstract needs 8 integers, got {len(values)}")
        return cls(
            quadrant=int(values[0]),
            distance_bin=int(values[1]),
            orientation=Orientation(int(values[2])),
            speed_bin=int(values[3]),
            actions=tuple(Action(int(v)) for v in values[4:8]),  # type: ignore[arg-type]
        )


@dataclass(frozen=True)
class StructuredScenario:
    """The compact code bridging language and scenes: one map abstract plus
    one agent abstract per vehicle (ego first)."""

    map_abstract: MapAbstract
    agents: tuple[AgentAbstract, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not 1 <= len(self.agents) <= MAX_AGENTS:
            raise ValidationError(
                f"agent count {len(self.agents)} outside [1, {MAX_AGENTS}]"
            )


def ego_distance_to_center(scenario: Scenario) -> float:
    """Distance from the ego's initial position to the map center."""
    ego0 = scenario.ego.states[0]
    return distance(ego0.position, scenario.map.center)
