"""Synthetic maps, tracks, and scenarios.

Used for the bundled map library, the overfit training fixture, and as
deterministic test material. All builders are pure functions of their
arguments, so fixtures regenerate identically everywhere.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

from .core.geometry import Point, rotate, wrap_angle
from .core.types import (
    FPS,
    HORIZON,
    AgentState,
    AgentTrack,
    LaneSegment,
    LaneType,
    LightState,
    MapRegion,
    Scenario,
)

LANE_WIDTH = 3.5
PIECE = 24.0  # default lane-segment length when chopping a corridor


def chop(start: Point, end: Point, piece: float, next_id: int,
         lane_type: LaneType, light: LightState = LightState.NONE) -> list[LaneSegment]:
    """Split a straight corridor into equal segments of roughly `piece` meters."""
    dx, dy = end[0] - start[0], end[1] - start[1]
    total = math.hypot(dx, dy)
    n = max(1, round(total / piece))
    lanes = []
    for i in range(n):
        t0, t1 = i / n, (i + 1) / n
        lanes.append(
            LaneSegment(
                id=next_id + i,
                start=(start[0] + t0 * dx, start[1] + t0 * dy),
                end=(start[0] + t1 * dx, start[1] + t1 * dy),
                lane_type=lane_type,
                light=light,
            )
        )
    return lanes


def two_way_road(a: Point, b: Point, lanes_per_dir: int = 1,
                 lane_width: float = LANE_WIDTH, piece: float = PIECE,
                 next_id: int = 1, with_edges: bool = True) -> list[LaneSegment]:
    """A straight two-way road whose rightmost forward corridor runs a -> b.

    Forward corridors sit at increasing left offsets from a->b, oncoming
    corridors beyond them, so traffic keeps to the right.
    """
    heading = math.atan2(b[1] - a[1], b[0] - a[0])
    left = rotate((0.0, 1.0), heading)  # unit vector to the left of travel

    def offset(p: Point, d: float) -> Point:
        return (p[0] + d * left[0], p[1] + d * left[1])

    lanes: list[LaneSegment] = []
    for i in range(lanes_per_dir):
        d = i * lane_width
        lanes.extend(chop(offset(a, d), offset(b, d), piece, next_id + len(lanes), LaneType.CENTER))
    for i in range(lanes_per_dir):
        d = (lanes_per_dir + i) * lane_width
        lanes.extend(chop(offset(b, d), offset(a, d), piece, next_id + len(lanes), LaneType.CENTER))
    if with_edges:
        right_edge = -lane_width / 2
        left_edge = (2 * lanes_per_dir - 0.5) * lane_width
        lanes.extend(chop(offset(a, right_edge), offset(b, right_edge), piece,
                          next_id + len(lanes), LaneType.EDGE))
        lanes.extend(chop(offset(a, left_edge), offset(b, left_edge), piece,
                          next_id + len(lanes), LaneType.EDGE))
    return lanes


def straight_region(lanes_per_dir: int = 1, half_length: float = 84.0,
                    region_id: str = "straight") -> MapRegion:
    """Ego-frame straight road; the ego corridor passes through the origin."""
    lanes = two_way_road((-half_length, 0.0), (half_length, 0.0), lanes_per_dir)
    return MapRegion(lanes=tuple(lanes), region_id=region_id, center=(0.0, 0.0))


def junction_region(crossing_distance: float = 12.0, lanes_per_dir: int = 2,
                    arm: float = 84.0, region_id: str = "junction") -> MapRegion:
    """Ego-frame four-way intersection ahead of the origin.

    The ego corridor runs along +x through the origin; the crossing road
    sits so its nearest lane crossing is `crossing_distance` meters from
    the origin.
    """
    lanes = two_way_road((-arm, 0.0), (arm, 0.0), lanes_per_dir, with_edges=False)
    cross_center = crossing_distance + (2 * lanes_per_dir - 1) * LANE_WIDTH
    cross = two_way_road(
        (cross_center, -arm), (cross_center, arm), lanes_per_dir,
        next_id=1 + len(lanes), with_edges=False,
    )
    return MapRegion(lanes=tuple(lanes) + tuple(cross), region_id=region_id,
                     center=(0.0, 0.0))


def drive_track(agent_id: int, start: Point, heading: float, speed: float,
                accel: Callable[[float], float] | float = 0.0,
                yaw_rate: Callable[[float], float] | float = 0.0,
                length: float = 4.6, width: float = 2.0) -> AgentTrack:
    """Integrate a simple unicycle model over the scenario horizon.

    `accel` and `yaw_rate` may be constants or functions of time (seconds).
    """
    accel_fn = accel if callable(accel) else (lambda t, a=accel: a)
    yaw_fn = yaw_rate if callable(yaw_rate) else (lambda t, w=yaw_rate: w)
    dt = 1.0 / FPS
    x, y, h, v = start[0], start[1], heading, speed
    states = []
    for i in range(HORIZON):
        states.append(AgentState(x=x, y=y, heading=h, speed=v, length=length, width=width))
        t = i * dt
        x += v * math.cos(h) * dt
        y += v * math.sin(h) * dt
        h = wrap_angle(h + yaw_fn(t) * dt)
        v = max(0.0, v + accel_fn(t) * dt)
    return AgentTrack(agent_id=agent_id, states=tuple(states))


def stopped_track(agent_id: int, position: Point, heading: float = 0.0,
                  length: float = 4.6, width: float = 2.0) -> AgentTrack:
    return drive_track(agent_id, position, heading, 0.0, length=length, width=width)


def transform_scenario(scenario: Scenario, angle: float, translation: Point) -> Scenario:
    """Apply a rigid transform (rotate about origin, then translate) to a scenario."""

    def move(p: Point) -> Point:
        r = rotate(p, angle)
        return (r[0] + translation[0], r[1] + translation[1])

    lanes = tuple(
        LaneSegment(id=l.id, start=move(l.start), end=move(l.end),
                    lane_type=l.lane_type, light=l.light)
        for l in scenario.map.lanes
    )
    agents = tuple(
        AgentTrack(
            agent_id=track.agent_id,
            states=tuple(
                AgentState(*move(s.position), heading=wrap_angle(s.heading + angle),
                           speed=s.speed, length=s.length, width=s.width)
                for s in track.states
            ),
        )
        for track in scenario.agents
    )
    region = MapRegion(lanes=lanes, region_id=scenario.map.region_id,
                       center=move(scenario.map.center))
    return Scenario(map=region, agents=agents, ego_index=scenario.ego_index)


def fixture_scenario() -> Scenario:
    """Canonical 3-agent fixture: ego cruising, a lead car braking ahead,
    and an oncoming car, on a 2+2 straight road."""
    region = straight_region(lanes_per_dir=2, region_id="fixture")
    ego = drive_track(1, (0.0, 0.0), 0.0, 6.0)
    lead = drive_track(2, (26.0, 0.3), 0.0, 5.0, accel=lambda t: -1.5 if t < 2.8 else 0.0)
    oncoming = drive_track(3, (45.0, 7.0), math.pi, 8.0)
    return Scenario(map=region, agents=(ego, lead, oncoming), ego_index=0)


def overfit_scenarios() -> list[Scenario]:
    """Eight deterministic small scenarios for the reconstruction smoke test.

    Speeds stay modest so relative trajectories remain well inside the
    map; every agent starts on a center-lane midpoint give or take a
    small offset.
    """
    scenarios = []

    road = straight_region(lanes_per_dir=2, region_id="overfit-road")
    scenarios.append(Scenario(map=road, agents=(
        drive_track(1, (0.0, 0.0), 0.0, 5.0),
        drive_track(2, (24.0, 0.2), 0.0, 4.0),
        drive_track(3, (48.0, 7.0), math.pi, 5.0),
    ), ego_index=0))

    scenarios.append(Scenario(map=road, agents=(
        drive_track(1, (0.0, 0.0), 0.0, 2.0, accel=0.8),
        drive_track(2, (-24.0, 3.5), 0.0, 6.0),
        drive_track(3, (24.0, 10.5), math.pi, 3.0),
    ), ego_index=0))

    scenarios.append(Scenario(map=road, agents=(
        drive_track(1, (0.0, 0.0), 0.0, 6.0, accel=-1.4),
        drive_track(2, (24.0, 3.3), 0.0, 5.0, accel=-1.2),
    ), ego_index=0))

    scenarios.append(Scenario(map=road, agents=(
        stopped_track(1, (0.0, 0.0)),
        stopped_track(2, (7.0, 0.0)),
        drive_track(3, (-24.0, 3.5), 0.0, 4.0),
        drive_track(4, (24.0, 7.0), math.pi, 4.0),
    ), ego_index=0))

    # Junction corridors: +y traffic at x = 22.5 and 19.0, -y at 15.5 and 12.0.
    junction = junction_region(region_id="overfit-junction")
    scenarios.append(Scenario(map=junction, agents=(
        drive_track(1, (0.0, 0.0), 0.0, 4.0),
        drive_track(2, (19.0, -36.0), math.pi / 2, 4.0),
        drive_track(3, (15.5, 36.0), -math.pi / 2, 3.0),
    ), ego_index=0))

    scenarios.append(Scenario(map=junction, agents=(
        drive_track(1, (0.0, 0.0), 0.0, 3.0,
                    yaw_rate=lambda t: math.radians(30.0) if 1.0 <= t < 4.0 else 0.0),
        drive_track(2, (-24.0, 3.5), 0.0, 3.0),
        stopped_track(3, (24.0, 7.0), math.pi),
    ), ego_index=0))

    scenarios.append(Scenario(map=junction, agents=(
        drive_track(1, (0.0, 0.0), 0.0, 5.0),
        drive_track(2, (12.0, 36.0), -math.pi / 2, 5.0,
                    yaw_rate=lambda t: -math.radians(25.0) if 2.0 <= t < 4.0 else 0.0),
        drive_track(3, (-24.0, 0.1), 0.0, 5.0),
        drive_track(4, (48.0, 7.2), math.pi, 2.0, accel=0.6),
    ), ego_index=0))

    scenarios.append(Scenario(map=road, agents=(
        drive_track(1, (0.0, 0.0), 0.0, 4.0,
                    yaw_rate=lambda t: math.radians(12.0) if 1.0 <= t < 2.0
                    else (-math.radians(12.0) if 2.0 <= t < 3.0 else 0.0)),
        drive_track(2, (24.0, 0.0), 0.0, 4.5),
        drive_track(3, (-26.0, 0.3), 0.0, 5.5),
    ), ego_index=0))

    return scenarios


def map_library() -> tuple[dict[str, list[LaneSegment]], list[tuple[str, Point, float]]]:
    """World-frame synthetic maps plus drive-trace points for index building.

    Returns (maps, traces) where each trace is (map_id, point, heading).
    """
    maps: dict[str, list[LaneSegment]] = {}
    traces: list[tuple[str, Point, float]] = []

    highway = two_way_road((-200.0, 0.0), (200.0, 0.0), lanes_per_dir=2)
    maps["highway"] = highway
    for x in (-120.0, -40.0, 40.0, 120.0):
        traces.append(("highway", (x, 0.0), 0.0))
    traces.append(("highway", (0.0, 7.0), math.pi))

    lanes = two_way_road((0.0, -200.0), (0.0, 200.0), lanes_per_dir=1)
    cross = two_way_road((-200.0, 101.75), (200.0, 101.75), lanes_per_dir=1,
                         next_id=1 + len(lanes))
    maps["crossing"] = lanes + cross
    traces.append(("crossing", (0.0, 20.0), math.pi / 2))
    traces.append(("crossing", (0.0, 88.0), math.pi / 2))
    traces.append(("crossing", (-30.0, 101.75), 0.0))

    grid = two_way_road((-150.0, 0.0), (150.0, 0.0), lanes_per_dir=2, with_edges=False)
    grid += two_way_road((5.25, -150.0), (5.25, 150.0), lanes_per_dir=2,
                         next_id=1 + len(grid), with_edges=False)
    maps["grid"] = grid
    traces.append(("grid", (-20.0, 0.0), 0.0))
    traces.append(("grid", (-60.0, 0.0), 0.0))
    traces.append(("grid", (5.25, -40.0), math.pi / 2))

    return maps, traces
