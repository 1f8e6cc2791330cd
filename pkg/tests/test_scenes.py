"""Tests for the bird's-eye transform and scene extraction."""

from __future__ import annotations

import numpy as np
import pytest

from riskgraph.ingest.log_models import DriverLogRecord, TrackObservation
from riskgraph.scenes import (
    DropReason,
    ExtractionError,
    Scene,
    SceneError,
    SceneFrame,
    TrajectoryParameterError,
    check_scene,
    extract_scenes,
    find_lane_change,
    integrate_trajectory,
    lane_boundaries,
    lane_index,
    road_map,
    to_birds_eye,
    vrm_feature,
    vrm_matrix,
)
from tests.builders import LANE_LINES, make_frame, make_record, make_scene

DT = 0.04


def _cut_in_frames(
    *,
    count: int = 100,
    change_at: int = 25,
    with_neighbour: bool = True,
    steer_at: int | None = None,
    unusable_at: int | None = None,
) -> list[SceneFrame]:
    """Track 1 moves from lane 1 to lane 2 at ``change_at``; track 2 stays in lane 3.

    The host brakes at -2 m/s² five frames after the change and at -3 m/s²
    long after the response horizon.
    """
    frames = []
    for i in range(count):
        tracks = [(1, 1 if i < change_at else 2, 20.0)]
        if with_neighbour:
            tracks.append((2, 3, 30.0))
        ax = -2.0 if i == change_at + 5 else -3.0 if i == change_at + 45 else 0.0
        frames.append(
            make_frame(
                i * DT,
                tracks,
                ax=ax,
                steer=0.05 if i == steer_at else 0.0,
                usable=i != unusable_at,
            )
        )
    return frames


class TestLaneGeometry:
    """Tests for lane boundaries and lane indices."""

    def test_four_detected_lines(self) -> None:
        """Test four detected lines bound the three lanes directly."""
        assert lane_boundaries(LANE_LINES) == LANE_LINES

    def test_outer_lines_extrapolated(self) -> None:
        """Test missing outer lines are placed one host-lane width outward."""
        assert lane_boundaries([-1.75, 1.75]) == (-5.25, -1.75, 1.75, 5.25)

    def test_too_few_lines(self) -> None:
        """Test a single line gives no geometry."""
        assert lane_boundaries([-1.75]) is None

    def test_host_not_between_lines(self) -> None:
        """Test lines all on one side of the host give no geometry."""
        assert lane_boundaries([0.5, 2.0, 5.5]) is None

    def test_lane_index_half_open(self) -> None:
        """Test each lane owns its left boundary but not its right one."""
        assert lane_index(-5.25, LANE_LINES) == 1
        assert lane_index(-1.75, LANE_LINES) == 2
        assert lane_index(1.75, LANE_LINES) == 3
        assert lane_index(5.25, LANE_LINES) is None


class TestBirdsEye:
    """Tests for the host-centred transform."""

    def test_tracks_kept_and_dropped(self) -> None:
        """Test every dropped track carries the rule that removed it."""
        record = DriverLogRecord(
            timestamp=0.0,
            ax=0.0,
            ay=0.0,
            steer=0.0,
            brake=0.0,
            throttle=0.3,
            vx=15.0,
            vy=0.0,
            lane_offsets=LANE_LINES,
            tracks=(
                TrackObservation(1, -3.5, 20.0, 0.0, 0.0),
                TrackObservation(2, 0.0, -8.0, 0.0, 0.0),
                TrackObservation(3, 0.0, 100.0, 0.0, 0.0),
                TrackObservation(4, 8.0, 30.0, 0.0, 0.0),
                TrackObservation(5, 3.5, 0.0, 0.0, 0.0),
            ),
        )

        frame = to_birds_eye(record)

        assert frame.usable
        assert [t.track_id for t in frame.tracks] == [1, 5]
        assert frame.lane_indices == (1, 3)
        assert {d.track_id: d.reason for d in frame.dropped} == {
            2: DropReason.BEHIND_HOST,
            3: DropReason.BEYOND_RANGE,
            4: DropReason.OUTSIDE_LANES,
        }

    def test_missing_lane_geometry(self) -> None:
        """Test a record without lane geometry yields an unusable empty frame."""
        record = make_record(0.0, tracks=[(1, 2, 20.0)], lane_offsets=(1.75,))

        frame = to_birds_eye(record)

        assert not frame.usable
        assert frame.tracks == ()
        assert frame.dropped[0].reason is DropReason.NO_LANE_GEOMETRY

    def test_operation_signals_carried(self) -> None:
        """Test the host signals are copied into the frame."""
        frame = to_birds_eye(make_record(1.2, ax=-1.5, steer=0.01, brake=0.25))

        assert frame.t == 1.2
        assert frame.host_ax == -1.5
        assert frame.operation().brake == 0.25


class TestSceneModels:
    """Tests for frame and scene invariants."""

    def test_lane_index_out_of_range(self) -> None:
        """Test a frame rejects a lane index outside 1..3."""
        with pytest.raises(SceneError):
            make_frame(0.0, [(1, 4, 10.0)])

    def test_track_behind_host(self) -> None:
        """Test a frame rejects a retained track behind the host."""
        with pytest.raises(SceneError) as exc_info:
            make_frame(0.0, [(1, 2, -2.0)])

        assert "outside [0, 100) m" in str(exc_info.value)

    def test_scene_needs_two_vehicles_at_anchor(self) -> None:
        """Test a scene shows at least two surrounding vehicles at its anchor."""
        with pytest.raises(ExtractionError) as exc_info:
            make_scene("s", -1.0, tracks=[(1, 2, 10.0)])

        assert "fewer than two surrounding vehicles" in str(exc_info.value)

    def test_scene_dict_round_trip(self) -> None:
        """Test a scene survives its dictionary form."""
        scene = make_scene("log-0000050", -2.5)

        assert Scene.from_dict(scene.to_dict()) == scene


class TestFindLaneChange:
    """Tests for persistent lane-change detection."""

    def test_persistent_change(self) -> None:
        """Test the change starts at the first frame in the new lane."""
        change = find_lane_change(_cut_in_frames(count=50), persistence=5)

        assert change is not None
        assert (change.offset, change.track_id) == (25, 1)

    def test_short_flicker_is_ignored(self) -> None:
        """Test a lane flip lasting fewer frames than required is no change."""
        frames = [
            make_frame(i * DT, [(1, 2 if 10 <= i < 13 else 1, 20.0), (2, 3, 30.0)])
            for i in range(50)
        ]

        assert find_lane_change(frames, persistence=5) is None

    def test_earliest_change_wins(self) -> None:
        """Test the earlier of two lane changes is chosen."""
        frames = [
            make_frame(
                i * DT,
                [(1, 1 if i < 30 else 2, 20.0), (2, 3 if i < 10 else 2, 40.0)],
            )
            for i in range(50)
        ]

        change = find_lane_change(frames, persistence=5)

        assert change is not None
        assert (change.offset, change.track_id) == (10, 2)


class TestExtractScenes:
    """Tests for window-based scene extraction."""

    def test_single_cut_in(self) -> None:
        """Test one scene is found with its anchor and response."""
        frames = _cut_in_frames()

        scenes = extract_scenes(frames, window=50, straight_tol=0.02, source="A")

        assert len(scenes) == 1
        scene = scenes[0]
        assert scene.scene_id == "A-0000000"
        assert scene.anchor == 25
        assert scene.lane_change_track == 1
        assert len(scene.frames) == 50
        assert scene.response_ax == -2.0
        assert scene.response_op.ax == -2.0
        assert check_scene(scene) == []

    def test_response_limited_to_horizon(self) -> None:
        """Test braking after the horizon does not count as the response."""
        frames = _cut_in_frames()

        scene = extract_scenes(frames, 50, 0.02, horizon=0.1)[0]

        assert scene.response_ax == 0.0

    def test_steering_rejects_window(self) -> None:
        """Test a window with a steering host is not a scene."""
        assert extract_scenes(_cut_in_frames(steer_at=3), 50, 0.02) == []

    def test_unusable_frame_rejects_window(self) -> None:
        """Test a window with an unusable frame is not a scene."""
        assert extract_scenes(_cut_in_frames(unusable_at=40), 50, 0.02) == []

    def test_single_vehicle_rejects_window(self) -> None:
        """Test a lane change with no other vehicle around is not a scene."""
        frames = _cut_in_frames(with_neighbour=False)

        assert extract_scenes(frames, 50, 0.02) == []

    def test_trailing_partial_window_ignored(self) -> None:
        """Test frames that do not fill a window are skipped."""
        frames = _cut_in_frames(count=40)

        assert extract_scenes(frames, 50, 0.02) == []

    def test_invalid_window(self) -> None:
        """Test a window below two frames is rejected."""
        with pytest.raises(ExtractionError):
            extract_scenes(_cut_in_frames(), window=1)

    def test_persistence_longer_than_window(self) -> None:
        """Test persistence may not exceed the window."""
        with pytest.raises(ExtractionError) as exc_info:
            extract_scenes(_cut_in_frames(), window=10, persistence=11)

        assert "Persistence 11" in str(exc_info.value)


class TestVrmFeature:
    """Tests for the lane-change vehicle feature."""

    def test_feature_at_anchor(self) -> None:
        """Test the feature is the relative state of the lane-change track."""
        scene = extract_scenes(_cut_in_frames(), 50, 0.02)[0]

        feature = vrm_feature(scene)

        assert feature.as_tuple() == (0.0, 20.0, 0.0, -1.0)
        assert vrm_matrix([scene]).shape == (1, 4)

    def test_empty_matrix(self) -> None:
        """Test no scenes give an empty 0×4 matrix."""
        assert vrm_matrix([]).shape == (0, 4)


class TestTrajectory:
    """Tests for host trajectory integration and the road map."""

    def test_constant_speed(self) -> None:
        """Test one second at 10 m/s advances the host 10 m."""
        path = integrate_trajectory([10.0] * 26, [0.0] * 26, DT)

        np.testing.assert_allclose(path[-1], [0.0, 10.0])

    def test_lateral_drift(self) -> None:
        """Test lateral velocity moves the host sideways."""
        path = integrate_trajectory([0.0] * 26, [0.5] * 26, DT)

        np.testing.assert_allclose(path[-1], [0.5, 0.0])

    def test_empty_sequence(self) -> None:
        """Test an empty velocity sequence is rejected."""
        with pytest.raises(TrajectoryParameterError):
            integrate_trajectory([], [])

    def test_length_mismatch(self) -> None:
        """Test velocity sequences of different lengths are rejected."""
        with pytest.raises(TrajectoryParameterError) as exc_info:
            integrate_trajectory([1.0, 2.0], [0.0])

        assert "differ in length" in str(exc_info.value)

    def test_non_positive_interval(self) -> None:
        """Test a zero sample interval is rejected."""
        with pytest.raises(TrajectoryParameterError):
            integrate_trajectory([1.0], [0.0], dt=0.0)

    def test_road_map_columns(self) -> None:
        """Test the road map places every lane line beside the host path."""
        records = [make_record(i * DT) for i in range(5)]

        frame = road_map(records)

        assert list(frame.columns) == [
            "t",
            "host_x",
            "host_y",
            "line_0",
            "line_1",
            "line_2",
            "line_3",
        ]
        np.testing.assert_allclose(frame["line_0"], -5.25)
        np.testing.assert_allclose(frame["host_y"].iloc[-1], 15.0 * 4 * DT)
