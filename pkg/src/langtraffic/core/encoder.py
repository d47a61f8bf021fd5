"""Rule-based encoder: turn a scenario into its integer structured code.

Everything is computed in the ego frame (+x = ego forward = "north",
+y = ego left), so the resulting code is invariant under rigid transforms
of the whole scene.
"""

from __future__ import annotations

import math
from typing import Sequence

from . import geometry as geo
from .geometry import Point
from .types import (
    Action,
    AgentAbstract,
    AgentState,
    AgentTrack,
    DISTANCE_BIN_MAX,
    DISTANCE_BIN_METERS,
    FPS,
    HORIZON,
    INTERSECTION_BIN_MAX,
    INTERSECTION_BIN_METERS,
    LaneSegment,
    LaneType,
    MapAbstract,
    MapRegion,
    Orientation,
    Scenario,
    SPEED_BIN_MAX,
    SPEED_BIN_MPS,
    StructuredScenario,
    ValidationError,
)

# Thresholds for the per-second action classifier.
STOP_SPEED = 0.5          # m/s, mean over the window
TURN_ANGLE = math.pi / 12  # rad of heading change per second
LANE_CHANGE_LATERAL = 1.5  # m perpendicular to the window-start heading
ACCEL_DELTA = 1.0          # m/s change over the window

# Parallel center lanes whose lateral offsets differ by more than this are
# counted as distinct corridors (roughly a lane width).
CORRIDOR_GAP = 2.5

_SECTOR_AXES = {
    Orientation.NORTH: (1.0, 0.0),
    Orientation.WEST: (0.0, 1.0),
    Orientation.SOUTH: (-1.0, 0.0),
    Orientation.EAST: (0.0, -1.0),
}


def to_ego_frame(scenario: Scenario) -> Scenario:
    """Rigidly transform a scenario so the ego sits at the origin with
    heading 0 at the first timestep."""
    if not scenario.agents:
        raise ValidationError("scenario has no agents")
    ego0 = scenario.ego.states[0]
    origin, angle = ego0.position, ego0.heading

    def move_point(p: Point) -> Point:
        return geo.transform_point(p, origin, angle)

    lanes = tuple(
        LaneSegment(
            id=l.id,
            start=move_point(l.start),
            end=move_point(l.end),
            lane_type=l.lane_type,
            light=l.light,
        )
        for l in scenario.map.lanes
    )
    region = MapRegion(lanes=lanes, region_id=scenario.map.region_id,
                       center=move_point(scenario.map.center))
    agents = tuple(
        AgentTrack(
            agent_id=track.agent_id,
            states=tuple(
                AgentState(
                    *move_point(s.position),
                    heading=geo.wrap_angle(s.heading - angle),
                    speed=s.speed,
                    length=s.length,
                    width=s.width,
                )
                for s in track.states
            ),
        )
        for track in scenario.agents
    )
    return Scenario(map=region, agents=agents, ego_index=scenario.ego_index)


def canonicalize(scenario: Scenario) -> Scenario:
    """Ego frame plus ego-first agent ordering (ego_index becomes 0)."""
    ego_framed = to_ego_frame(scenario)
    if ego_framed.ego_index == 0:
        return ego_framed
    order = [ego_framed.ego_index] + [
        i for i in range(len(ego_framed.agents)) if i != ego_framed.ego_index
    ]
    return Scenario(
        map=ego_framed.map,
        agents=tuple(ego_framed.agents[i] for i in order),
        ego_index=0,
    )


def quadrant_of(x: float, y: float) -> int:
    """Quadrant index of an ego-frame offset; axis ties take the lowest index."""
    candidates = []
    for idx, (sx, sy) in ((1, (1, -1)), (2, (1, 1)), (3, (-1, 1)), (4, (-1, -1))):
        if (x == 0 or (x > 0) == (sx > 0)) and (y == 0 or (y > 0) == (sy > 0)):
            candidates.append(idx)
    return min(candidates)


def orientation_of(heading: float) -> Orientation:
    """Compass sector of an ego-frame heading.

    Sectors are half-open, lower-edge inclusive: north = [-pi/4, pi/4),
    west = [pi/4, 3pi/4), east = [-3pi/4, -pi/4), south = the rest.
    """
    h = geo.wrap_angle(heading)
    if -math.pi / 4 <= h < math.pi / 4:
        return Orientation.NORTH
    if math.pi / 4 <= h < 3 * math.pi / 4:
        return Orientation.WEST
    if -3 * math.pi / 4 <= h < -math.pi / 4:
        return Orientation.EAST
    return Orientation.SOUTH


def distance_bin_of(dist: float, bin_size: float = DISTANCE_BIN_METERS,
                    bin_max: int = DISTANCE_BIN_MAX) -> int:
    return min(int(dist // bin_size), bin_max)


def speed_bin_of(speed: float) -> int:
    return min(int(speed // SPEED_BIN_MPS), SPEED_BIN_MAX)


def classify_actions(states: Sequence[AgentState]) -> tuple[Action, Action, Action, Action]:
    """Label each of the first four one-second windows with one maneuver.

    Windows span frames [10w, 10w+10) with deltas taken from the window
    start to its end boundary; priority is stop > turn > lane change >
    accel/decel > forward.
    """
    labels = []
    for w in range(4):
        s, e = FPS * w, FPS * (w + 1)
        window = states[s:e]
        start, boundary = states[s], states[e]
        mean_speed = sum(st.speed for st in window) / len(window)
        if mean_speed < STOP_SPEED:
            labels.append(Action.STOP)
            continue
        dh = geo.wrap_angle(boundary.heading - start.heading)
        if abs(dh) > TURN_ANGLE:
            labels.append(Action.TURN_LEFT if dh > 0 else Action.TURN_RIGHT)
            continue
        dx = boundary.x - start.x
        dy = boundary.y - start.y
        lateral = -math.sin(start.heading) * dx + math.cos(start.heading) * dy
        if abs(lateral) > LANE_CHANGE_LATERAL:
            labels.append(Action.LANE_CHANGE_LEFT if lateral > 0 else Action.LANE_CHANGE_RIGHT)
            continue
        dv = boundary.speed - start.speed
        if abs(dv) > ACCEL_DELTA:
            labels.append(Action.ACCELERATE if dv > 0 else Action.DECELERATE)
            continue
        labels.append(Action.FORWARD)
    return tuple(labels)  # type: ignore[return-value]


def encode_agent(states: Sequence[AgentState],
                 distance_bin_size: float = DISTANCE_BIN_METERS,
                 distance_bin_max: int = DISTANCE_BIN_MAX) -> AgentAbstract:
    """Abstract an ego-frame state sequence into its 8-integer code."""
    if len(states) != HORIZON:
        raise ValidationError(f"expected {HORIZON} states, got {len(states)}")
    first = states[0]
    return AgentAbstract(
        quadrant=quadrant_of(first.x, first.y),
        distance_bin=distance_bin_of(geo.norm(first.position),
                                     distance_bin_size, distance_bin_max),
        orientation=orientation_of(first.heading),
        speed_bin=speed_bin_of(first.speed),
        actions=classify_actions(states),
    )


def _corridor_offsets(lanes: Sequence[LaneSegment], sector: Orientation) -> list[float]:
    """Sorted lateral offsets of the distinct parallel corridors in a sector.

    Offsets are signed along the sector's left axis, so smaller means
    further to the right of travel.
    """
    axis_x, axis_y = _SECTOR_AXES[sector]
    left_x, left_y = -axis_y, axis_x
    offsets = sorted(
        geo.midpoint(l.start, l.end)[0] * left_x + geo.midpoint(l.start, l.end)[1] * left_y
        for l in lanes
    )
    corridors: list[float] = []
    for off in offsets:
        if not corridors or off - corridors[-1] > CORRIDOR_GAP:
            corridors.append(off)
    return corridors


def abstract_map(region: MapRegion, ego_lane: LaneSegment) -> MapAbstract:
    """Abstract an ego-frame map into its 6-integer code."""
    if ego_lane not in region.lanes:
        raise ValidationError(f"ego lane {ego_lane.id} not in region {region.region_id}")
    centers = region.center_lanes()
    by_sector: dict[Orientation, list[LaneSegment]] = {o: [] for o in Orientation}
    for lane in centers:
        by_sector[orientation_of(geo.heading_of(lane.start, lane.end))].append(lane)

    corridor_map = {o: _corridor_offsets(by_sector[o], o) for o in Orientation}
    counts = tuple(len(corridor_map[o]) for o in
                   (Orientation.NORTH, Orientation.SOUTH, Orientation.EAST, Orientation.WEST))

    ego_sector = orientation_of(geo.heading_of(ego_lane.start, ego_lane.end))
    axis_x, axis_y = _SECTOR_AXES[ego_sector]
    left_x, left_y = -axis_y, axis_x
    mid = geo.midpoint(ego_lane.start, ego_lane.end)
    ego_offset = mid[0] * left_x + mid[1] * left_y
    to_the_right = sum(
        1 for off in corridor_map[ego_sector] if off < ego_offset - CORRIDOR_GAP / 2
    )

    nearest = math.inf
    for i, a in enumerate(centers):
        ha = geo.heading_of(a.start, a.end)
        for b in centers[i + 1:]:
            hb = geo.heading_of(b.start, b.end)
            if geo.line_angle_between(ha, hb) <= math.pi / 6:
                continue
            crossing = geo.segment_intersection(a.start, a.end, b.start, b.end)
            if crossing is not None:
                nearest = min(nearest, geo.distance(region.center, crossing))
    if math.isinf(nearest):
        intersection_bin = INTERSECTION_BIN_MAX
    else:
        intersection_bin = min(int(nearest // INTERSECTION_BIN_METERS), INTERSECTION_BIN_MAX)

    return MapAbstract(
        lanes_by_direction=counts,
        intersection_distance_bin=intersection_bin,
        ego_lane_id=1 + to_the_right,
    )


def nearest_center_lane(region: MapRegion, point: Point) -> LaneSegment:
    """Center lane whose midpoint is nearest to a point."""
    centers = region.center_lanes()
    if not centers:
        raise ValidationError(f"region {region.region_id} has no center lanes")
    return min(centers, key=lambda l: geo.distance(geo.midpoint(l.start, l.end), point))


def rescale_distance_bins(code: StructuredScenario,
                          source_bin: float = 5.0,
                          target_bin: float = DISTANCE_BIN_METERS,
                          target_max: int = DISTANCE_BIN_MAX) -> StructuredScenario:
    """Re-express agent distance bins at a different bin size.

    Editing codes carry fine 5-meter bins; the generator's query
    vocabulary expects the coarse 20-meter bins, so codes are converted
    via each bin's lower edge before decoding.
    """
    agents = tuple(
        AgentAbstract(
            quadrant=a.quadrant,
            distance_bin=min(int(a.distance_bin * source_bin // target_bin), target_max),
            orientation=a.orientation,
            speed_bin=a.speed_bin,
            actions=a.actions,
        )
        for a in code.agents
    )
    return StructuredScenario(map_abstract=code.map_abstract, agents=agents)


def encode_scenario(scenario: Scenario,
                    distance_bin_size: float = DISTANCE_BIN_METERS,
                    distance_bin_max: int = DISTANCE_BIN_MAX) -> StructuredScenario:
    """Encode a scenario into its structured code, ego agent first."""
    canon = canonicalize(scenario)
    agents = tuple(
        encode_agent(track.states, distance_bin_size, distance_bin_max)
        for track in canon.agents
    )
    ego_lane = nearest_center_lane(canon.map, canon.agents[0].states[0].position)
    return StructuredScenario(
        map_abstract=abstract_map(canon.map, ego_lane),
        agents=agents,
    )
