import math
import random

import pytest

from langtraffic import synth
from langtraffic.core import (
    Action,
    AgentTrack,
    Orientation,
    Scenario,
    ValidationError,
    abstract_map,
    classify_actions,
    encode_agent,
    encode_scenario,
    nearest_center_lane,
    to_ego_frame,
)
from langtraffic.core.encoder import (
    distance_bin_of,
    orientation_of,
    quadrant_of,
    rescale_distance_bins,
    speed_bin_of,
)


class TestEgoFrame:
    def test_identity_when_ego_at_origin(self):
        scenario = synth.fixture_scenario()
        assert to_ego_frame(scenario) == scenario

    def test_pure_translation(self):
        region = synth.straight_region()
        ego = synth.drive_track(1, (10.0, 0.0), 0.0, 0.0)
        other = synth.drive_track(2, (30.0, 0.0), 0.0, 0.0)
        moved = to_ego_frame(Scenario(map=region, agents=(ego, other), ego_index=0))
        assert moved.agents[1].states[0].position == pytest.approx((20.0, 0.0))

    def test_rotation_by_ego_heading(self):
        # Ego heading pi/2; an agent 5 m "up" in world sits 5 m ahead in ego frame.
        region = synth.straight_region()
        ego = synth.drive_track(1, (3.0, 4.0), math.pi / 2, 0.0)
        other = synth.drive_track(2, (3.0, 9.0), math.pi / 2, 0.0)
        moved = to_ego_frame(Scenario(map=region, agents=(ego, other), ego_index=0))
        assert moved.agents[1].states[0].position == pytest.approx((5.0, 0.0))
        assert moved.agents[1].states[0].heading == pytest.approx(0.0)

    def test_distances_preserved(self):
        scenario = synth.transform_scenario(synth.fixture_scenario(), 0.7, (11.0, -3.0))
        moved = to_ego_frame(scenario)
        for before, after in zip(scenario.agents, moved.agents):
            d_before = math.dist(before.states[0].position, before.states[-1].position)
            d_after = math.dist(after.states[0].position, after.states[-1].position)
            assert d_after == pytest.approx(d_before)


class TestQuadrants:
    @pytest.mark.parametrize("x,y,expected", [
        (10.0, -5.0, 1), (10.0, 5.0, 2), (-1.0, 1.0, 3), (-1.0, -1.0, 4),
    ])
    def test_off_axis(self, x, y, expected):
        assert quadrant_of(x, y) == expected

    @pytest.mark.parametrize("x,y,expected", [
        (5.0, 0.0, 1),   # +x axis: between 1 and 2 -> 1
        (0.0, 5.0, 2),   # +y axis: between 2 and 3 -> 2
        (-5.0, 0.0, 3),  # -x axis: between 3 and 4 -> 3
        (0.0, -5.0, 1),  # -y axis: between 1 and 4 -> 1
        (0.0, 0.0, 1),
    ])
    def test_axis_ties_take_lower_index(self, x, y, expected):
        assert quadrant_of(x, y) == expected


class TestBins:
    def test_distance_bin_boundaries_left_closed(self):
        assert distance_bin_of(19.999) == 0
        assert distance_bin_of(20.0) == 1
        assert distance_bin_of(20.001) == 1
        assert distance_bin_of(0.0) == 0
        assert distance_bin_of(1000.0) == 7

    def test_speed_bin_boundaries(self):
        assert speed_bin_of(2.499) == 0
        assert speed_bin_of(2.5) == 1
        assert speed_bin_of(2.501) == 1
        assert speed_bin_of(99.0) == 7

    def test_bins_monotone(self):
        distances = [distance_bin_of(d) for d in range(0, 200, 7)]
        assert distances == sorted(distances)
        speeds = [speed_bin_of(v / 10.0) for v in range(0, 300, 7)]
        assert speeds == sorted(speeds)

    @pytest.mark.parametrize("heading,expected", [
        (0.0, Orientation.NORTH),
        (math.pi / 2, Orientation.WEST),
        (math.pi, Orientation.SOUTH),
        (-math.pi / 2, Orientation.EAST),
        (math.pi / 4, Orientation.WEST),        # lower-edge-inclusive sectors
        (-math.pi / 4, Orientation.NORTH),
    ])
    def test_orientation_sectors(self, heading, expected):
        assert orientation_of(heading) == expected


class TestClassifyActions:
    def test_constant_speed_straight(self):
        track = synth.drive_track(1, (0.0, 0.0), 0.0, 5.0)
        assert classify_actions(track.states) == (Action.FORWARD,) * 4

    def test_stationary(self):
        track = synth.stopped_track(1, (3.0, 3.0))
        assert classify_actions(track.states) == (Action.STOP,) * 4

    def test_left_arc_30_deg_per_second(self):
        # Heading change pi/6 per window exceeds the pi/12 turn threshold.
        track = synth.drive_track(1, (0.0, 0.0), 0.0, 5.0, yaw_rate=math.radians(30.0))
        assert classify_actions(track.states) == (Action.TURN_LEFT,) * 4

    def test_right_arc(self):
        track = synth.drive_track(1, (0.0, 0.0), 0.0, 5.0, yaw_rate=-math.radians(30.0))
        assert classify_actions(track.states) == (Action.TURN_RIGHT,) * 4

    def test_acceleration(self):
        track = synth.drive_track(1, (0.0, 0.0), 0.0, 5.0, accel=1.5)
        assert classify_actions(track.states) == (Action.ACCELERATE,) * 4

    def test_output_ignores_frames_past_41(self):
        base = synth.drive_track(1, (0.0, 0.0), 0.0, 5.0)
        tampered = list(base.states[:41]) + [
            s for s in synth.drive_track(1, (500.0, 500.0), 1.0, 20.0).states[41:]
        ]
        assert classify_actions(tampered) == classify_actions(base.states)


class TestEncodeAgent:
    def test_front_right_slow(self):
        track = synth.drive_track(1, (10.0, -5.0), 0.0, 3.0)
        abstract = encode_agent(track.states)
        assert abstract.quadrant == 1
        assert abstract.distance_bin == 0
        assert abstract.orientation is Orientation.NORTH
        assert abstract.speed_bin == 1

    def test_distance_25m_is_bin_1(self):
        track = synth.drive_track(1, (25.0, 0.0), 0.0, 3.0)
        assert encode_agent(track.states).distance_bin == 1

    def test_back_left_southbound_stopped(self):
        track = synth.stopped_track(1, (-1.0, 1.0), heading=math.pi)
        abstract = encode_agent(track.states)
        assert abstract.quadrant == 3
        assert abstract.orientation is Orientation.SOUTH
        assert abstract.speed_bin == 0

    def test_wrong_length_rejected(self):
        track = synth.drive_track(1, (0.0, 0.0), 0.0, 3.0)
        with pytest.raises(ValidationError):
            encode_agent(track.states[:40])

    def test_edit_bins_use_5m_intervals(self):
        track = synth.drive_track(1, (25.0, 0.0), 0.0, 3.0)
        abstract = encode_agent(track.states, distance_bin_size=5.0, distance_bin_max=31)
        assert abstract.distance_bin == 5

    def test_rescale_edit_bins_to_generation(self):
        code = encode_scenario(synth.fixture_scenario(), distance_bin_size=5.0,
                               distance_bin_max=31)
        coarse = rescale_distance_bins(code)
        expected = encode_scenario(synth.fixture_scenario())
        assert [a.distance_bin for a in coarse.agents] == [
            a.distance_bin for a in expected.agents]


class TestAbstractMap:
    def test_single_straight_lane(self):
        from langtraffic.core import LaneType, MapRegion
        region = MapRegion(
            lanes=tuple(synth.chop((-60.0, 0.0), (60.0, 0.0), 24.0, 1,
                                   LaneType.CENTER)),
            region_id="one-lane", center=(0.0, 0.0))
        ego_lane = nearest_center_lane(region, (0.0, 0.0))
        abstract = abstract_map(region, ego_lane)
        assert abstract.lanes_by_direction == (1, 0, 0, 0)
        assert abstract.ego_lane_id == 1
        assert abstract.intersection_distance_bin == 15

    def test_two_way_straight_road(self):
        region = synth.straight_region(lanes_per_dir=1)
        ego_lane = nearest_center_lane(region, (0.0, 0.0))
        abstract = abstract_map(region, ego_lane)
        assert abstract.lanes_by_direction == (1, 1, 0, 0)
        assert abstract.ego_lane_id == 1
        assert abstract.intersection_distance_bin == 15

    def test_four_way_intersection(self):
        # Two corridors per direction, nearest lane crossing 12 m ahead.
        region = synth.junction_region(crossing_distance=12.0, lanes_per_dir=2)
        ego_lane = nearest_center_lane(region, (0.0, 0.0))
        abstract = abstract_map(region, ego_lane)
        assert abstract.lanes_by_direction == (2, 2, 2, 2)
        assert abstract.intersection_distance_bin == 2
        assert abstract.ego_lane_id == 1

    def test_ego_lane_id_counts_from_rightmost(self):
        region = synth.straight_region(lanes_per_dir=2)
        # The corridor at y=3.5 has the y=0 corridor to its right.
        left_lane = next(l for l in region.center_lanes()
                         if abs(l.start[1] - 3.5) < 0.1 and l.end[0] > l.start[0])
        assert abstract_map(region, left_lane).ego_lane_id == 2

    def test_ego_lane_must_be_in_region(self):
        region = synth.straight_region()
        other = synth.junction_region().lanes[-1]
        with pytest.raises(ValidationError):
            abstract_map(region, other)


class TestEncodeScenario:
    def test_single_stationary_ego(self):
        region = synth.straight_region()
        scenario = Scenario(map=region, agents=(synth.stopped_track(1, (0.0, 0.0)),),
                            ego_index=0)
        code = encode_scenario(scenario)
        assert len(code.agents) == 1
        ego = code.agents[0]
        assert ego.quadrant == 1
        assert ego.distance_bin == 0
        assert ego.speed_bin == 0
        assert ego.actions == (Action.STOP,) * 4

    def test_two_agents_hand_rules(self):
        region = synth.straight_region()
        scenario = Scenario(map=region, agents=(
            synth.drive_track(1, (0.0, 0.0), 0.0, 0.0),
            synth.drive_track(2, (25.0, 0.5), 0.0, 3.0),
        ), ego_index=0)
        other = encode_scenario(scenario).agents[1]
        assert other.quadrant == 2  # y > 0 in the ego frame
        assert other.distance_bin == 1
        assert other.speed_bin == 1

    def test_ego_comes_first_regardless_of_input_order(self):
        region = synth.straight_region()
        scenario = Scenario(map=region, agents=(
            synth.drive_track(1, (25.0, 0.0), 0.0, 3.0),
            synth.drive_track(2, (0.0, 0.0), 0.0, 6.0),
        ), ego_index=1)
        code = encode_scenario(scenario)
        assert code.agents[0].distance_bin == 0
        assert code.agents[0].speed_bin == 2
        assert code.agents[1].distance_bin == 1

    def test_golden_fixture_code(self):
        code = encode_scenario(synth.fixture_scenario())
        assert code.map_abstract.to_ints() == [2, 2, 0, 0, 15, 1]
        assert [a.to_ints() for a in code.agents] == [
            [1, 0, 0, 2, 4, 4, 4, 4],
            [2, 1, 0, 2, 6, 6, 6, 4],
            [2, 2, 1, 3, 4, 4, 4, 4],
        ]

    def test_rigid_invariance(self):
        scenario = synth.fixture_scenario()
        code = encode_scenario(scenario)
        rng = random.Random(42)
        for _ in range(25):
            angle = rng.uniform(-math.pi, math.pi)
            shift = (rng.uniform(-200, 200), rng.uniform(-200, 200))
            moved = synth.transform_scenario(scenario, angle, shift)
            assert encode_scenario(moved) == code
