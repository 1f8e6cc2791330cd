"""Tests for log parsing, smoothing and synthetic log generation."""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

import numpy as np
import pytest

from riskgraph.ingest import (
    SAMPLE_INTERVAL,
    DriverLogRecord,
    EmptyLogError,
    IngestError,
    LogSchema,
    LogSchemaError,
    NoiseSpec,
    ScenarioSpec,
    ScenarioSpecError,
    SmoothingParameterError,
    SuiteSpec,
    TrackObservation,
    VehicleScript,
    build_suite,
    generate_synthetic,
    parse_log,
    serialize_csv,
    smooth_records,
    smooth_series,
)
from tests.builders import make_record

RESOURCES = Path(__file__).parent.parent / "resources"

SILENT = NoiseSpec(ax=0.0, ay=0.0, steer=0.0, lateral_speed=0.0, lane=0.0, track=0.0)

HEADER = (
    "timestamp,ax,ay,steer,brake,throttle,vx,vy,lane_0,lane_1,lane_2,lane_3,"
    "cipv_id,trk0_id,trk0_dx,trk0_dy,trk0_dvx,trk0_dvy"
)


def _row(t: float, brake: float = 0.2, dy: str = "20.0") -> str:
    return (
        f"{t},-0.5,0.0,0.0,{brake},0.0,15.0,0.0,-5.25,-1.75,1.75,5.25,"
        f"7,7,0.0,{dy},0.0,-1.0"
    )


class TestLogModels:
    """Tests for the record invariants."""

    def test_track_outside_sensing_range(self) -> None:
        """Test a track beyond 100 m is rejected."""
        with pytest.raises(IngestError) as exc_info:
            TrackObservation(track_id=3, dx=0.0, dy=120.0, dvx=0.0, dvy=0.0)

        assert "outside the sensing range" in str(exc_info.value)

    def test_brake_outside_unit_interval(self) -> None:
        """Test a brake signal above 1 is rejected."""
        with pytest.raises(IngestError) as exc_info:
            make_record(0.0, brake=1.5)

        assert "Brake signal 1.5" in str(exc_info.value)

    def test_unordered_lane_offsets(self) -> None:
        """Test lane lines must be ordered left to right."""
        with pytest.raises(IngestError):
            make_record(0.0, lane_offsets=(1.75, -1.75))

    def test_duplicate_track_ids(self) -> None:
        """Test a record may not report the same track twice."""
        with pytest.raises(IngestError) as exc_info:
            make_record(0.0, tracks=[(4, 1, 10.0), (4, 3, 30.0)])

        assert "Duplicate track identifiers" in str(exc_info.value)

    def test_unknown_channel(self) -> None:
        """Test looking up a channel that is not continuous."""
        record = make_record(0.0)
        with pytest.raises(IngestError):
            record.channel("timestamp")

    def test_record_dict_round_trip(self) -> None:
        """Test a record survives its dictionary form."""
        record = make_record(0.4, tracks=[(1, 1, 12.5)], ax=-1.25)

        assert DriverLogRecord.from_dict(record.to_dict()) == record


class TestLogSchema:
    """Tests for column maps."""

    def test_unknown_key(self) -> None:
        """Test an unknown schema key names the key."""
        with pytest.raises(LogSchemaError) as exc_info:
            LogSchema.from_dict({"speed": "v"})

        assert "Unknown schema keys: speed" in str(exc_info.value)

    def test_custom_column_names(self) -> None:
        """Test a renamed column is read through the schema."""
        content = (HEADER.replace("timestamp", "time") + "\n" + _row(0.0)).encode()
        schema = LogSchema.from_dict({"timestamp": "time"})

        parsed = parse_log(content, schema)

        assert parsed.records[0].timestamp == 0.0


class TestParseLog:
    """Tests for CSV parsing."""

    def test_parse_valid_rows(self) -> None:
        """Test rows are parsed in file order with their tracks."""
        content = "\n".join([HEADER, _row(0.0), _row(0.04)]).encode()

        parsed = parse_log(content)

        assert parsed.skipped_rows == 0
        assert [r.timestamp for r in parsed.records] == [0.0, 0.04]
        record = parsed.records[0]
        assert record.lane_offsets == (-5.25, -1.75, 1.75, 5.25)
        assert record.cipv_id == 7
        assert record.tracks[0].track_id == 7
        assert record.tracks[0].dy == 20.0

    def test_serialized_log_parses_back(self) -> None:
        """Test a serialized log reproduces its records."""
        records = [
            make_record(0.0, tracks=[(1, 1, 12.5), (2, 3, 40.0)], ax=-0.75),
            make_record(0.04, tracks=[(1, 2, 12.0)], ax=-1.0, brake=0.25),
        ]

        parsed = parse_log(serialize_csv(records))

        assert list(parsed.records) == records

    def test_malformed_rows_are_skipped(self) -> None:
        """Test rows breaking record invariants are counted and dropped."""
        content = "\n".join(
            [HEADER, _row(0.0), _row(0.04, brake=2.0), _row(0.08)]
        ).encode()

        parsed = parse_log(content)

        assert parsed.skipped_rows == 1
        assert [r.timestamp for r in parsed.records] == [0.0, 0.08]

    def test_out_of_order_rows_are_skipped(self) -> None:
        """Test a row whose timestamp does not increase is dropped."""
        content = "\n".join([HEADER, _row(0.04), _row(0.0), _row(0.08)]).encode()

        parsed = parse_log(content)

        assert parsed.skipped_rows == 1
        assert [r.timestamp for r in parsed.records] == [0.04, 0.08]

    def test_track_beyond_range_is_dropped(self) -> None:
        """Test a track outside the sensing range leaves the row intact."""
        content = "\n".join([HEADER, _row(0.0, dy="150.0")]).encode()

        parsed = parse_log(content)

        assert parsed.skipped_rows == 0
        assert parsed.records[0].tracks == ()

    def test_comment_lines_are_ignored(self) -> None:
        """Test a leading digest comment does not disturb parsing."""
        content = "\n".join(["# config_digest=abc", HEADER, _row(0.0)]).encode()

        assert len(parse_log(content).records) == 1

    def test_missing_column(self) -> None:
        """Test a missing required column is named."""
        header = HEADER.replace("timestamp,ax,", "timestamp,")
        row = _row(0.0).replace("0.0,-0.5,", "0.0,", 1)
        content = "\n".join([header, row]).encode()

        with pytest.raises(LogSchemaError) as exc_info:
            parse_log(content)

        assert "missing required columns: ax" in str(exc_info.value)

    def test_empty_content(self) -> None:
        """Test an empty file is reported as empty."""
        with pytest.raises(EmptyLogError):
            parse_log(b"")

    def test_no_valid_rows(self) -> None:
        """Test a log whose rows are all malformed is reported as empty."""
        content = "\n".join([HEADER, _row(0.0, brake=3.0)]).encode()

        with pytest.raises(EmptyLogError) as exc_info:
            parse_log(content)

        assert "1 malformed rows skipped" in str(exc_info.value)


class TestSmoothing:
    """Tests for local weighted linear regression smoothing."""

    def test_linear_series_is_unchanged(self) -> None:
        """Test a straight line is reproduced, windows truncated at the ends."""
        values = np.linspace(-2.0, 3.0, 40)

        np.testing.assert_allclose(smooth_series(values, 9), values, atol=1e-9)

    def test_noise_is_reduced(self) -> None:
        """Test smoothing lowers the variance of white noise."""
        noise = np.random.default_rng(0).normal(0.0, 1.0, 500)

        assert smooth_series(noise, 25).std() < 0.5 * noise.std()

    @pytest.mark.parametrize("span", [3, 5, 11, 25, 41])
    def test_affine_series_exact_for_every_span(self, span: int) -> None:
        """Test a degree-1 fit reproduces any affine series at every span."""
        t = np.arange(60, dtype=np.float64)
        values = 0.37 * t - 4.2

        np.testing.assert_allclose(smooth_series(values, span), values, atol=1e-9)

    @pytest.mark.parametrize("span", [3, 11, 25])
    def test_constant_shift_passes_through(self, span: int) -> None:
        """Test adding a constant to the input adds it to the output."""
        values = np.random.default_rng(span).normal(0.0, 1.0, 60)

        shifted = smooth_series(values + 12.5, span)

        np.testing.assert_allclose(shifted, smooth_series(values, span) + 12.5)

    def test_noisy_sine_is_closer_to_clean(self) -> None:
        """Test smoothing a noisy sine moves it closer to the clean curve."""
        t = np.linspace(0.0, 4.0 * np.pi, 200)
        clean = np.sin(t)
        noisy = clean + np.random.default_rng(1).normal(0.0, 0.2, t.size)

        smoothed = smooth_series(noisy, 11)

        input_rms = float(np.sqrt(np.mean((noisy - clean) ** 2)))
        output_rms = float(np.sqrt(np.mean((smoothed - clean) ** 2)))
        assert output_rms < input_rms

    def test_even_span(self) -> None:
        """Test an even span is rejected."""
        with pytest.raises(SmoothingParameterError) as exc_info:
            smooth_series([0.0] * 10, 4)

        assert "Invalid smoothing span 4" in str(exc_info.value)

    def test_span_longer_than_series(self) -> None:
        """Test a span longer than the series is rejected."""
        with pytest.raises(SmoothingParameterError):
            smooth_series([0.0] * 10, 11)

    def test_bounded_channels_stay_in_range(self) -> None:
        """Test brake and throttle remain within [0, 1] after smoothing."""
        records = [
            make_record(i * SAMPLE_INTERVAL, brake=1.0 if i % 2 else 0.0)
            for i in range(30)
        ]

        smoothed = smooth_records(records, 5)

        assert all(0.0 <= r.brake <= 1.0 for r in smoothed)
        assert [r.timestamp for r in smoothed] == [r.timestamp for r in records]

    def test_selected_channels_only(self) -> None:
        """Test channels outside the selection keep their raw values."""
        records = [
            make_record(i * SAMPLE_INTERVAL, ax=float(i % 2)) for i in range(11)
        ]

        smoothed = smooth_records(records, 5, channels=["vx"])

        assert [r.ax for r in smoothed] == [r.ax for r in records]

    def test_unknown_channel(self) -> None:
        """Test an unknown channel name is rejected."""
        with pytest.raises(SmoothingParameterError) as exc_info:
            smooth_records([make_record(0.0)], 3, channels=["yaw"])

        assert "Unknown channels: yaw" in str(exc_info.value)


class TestSynthetic:
    """Tests for the synthetic log generator."""

    def _demo(self) -> ScenarioSpec:
        data = json.loads((RESOURCES / "demo_scenario.json").read_text())
        return ScenarioSpec.from_dict(data)

    def test_same_seed_same_log(self) -> None:
        """Test generation is deterministic for a seed."""
        spec = self._demo()

        assert generate_synthetic(spec, 5) == generate_synthetic(spec, 5)

    def test_different_seed_changes_noise(self) -> None:
        """Test a different seed draws different measurement noise."""
        spec = self._demo()

        first = generate_synthetic(spec, 5)
        second = generate_synthetic(spec, 6)

        assert [r.ay for r in first] != [r.ay for r in second]

    def test_sampling_and_invariants(self) -> None:
        """Test the log is sampled at 25 Hz and every track is in range."""
        records = generate_synthetic(self._demo(), 1)

        assert len(records) == 251
        steps = np.diff([r.timestamp for r in records])
        np.testing.assert_allclose(steps, SAMPLE_INTERVAL, atol=1e-6)
        assert all(-30.0 <= t.dy <= 100.0 for r in records for t in r.tracks)

    def test_cut_in_triggers_braking(self) -> None:
        """Test the host decelerates once the cut-in vehicle is ahead in its lane."""
        records = generate_synthetic(self._demo(), 1)

        assert min(r.ax for r in records) < -1.0
        assert max(r.brake for r in records) > 0.0

    def test_vehicle_outside_lanes(self) -> None:
        """Test a vehicle spawned outside the three lanes is rejected."""
        spec = ScenarioSpec(
            duration=2.0, vehicles=(VehicleScript(track_id=1, lane=4, dy0=20.0),)
        )

        with pytest.raises(ScenarioSpecError) as exc_info:
            generate_synthetic(spec, 0)

        assert "outside the 3 lanes" in str(exc_info.value)

    def test_unknown_scenario_key(self) -> None:
        """Test an unknown key in a scenario description is rejected."""
        with pytest.raises(ScenarioSpecError):
            ScenarioSpec.from_dict({"duration": 1.0, "weather": "rain"})

    def test_suite_layout(self) -> None:
        """Test a suite holds one cut-in per episode."""
        scenario = build_suite(SuiteSpec(episodes=4), seed=2)

        cut_ins = [v for v in scenario.vehicles if v.maneuver == "cut_in"]
        assert len(cut_ins) == 4
        assert all(v.target_lane == 2 for v in cut_ins)
        assert scenario.duration == pytest.approx(39.96)

    def test_suite_period_must_hold_windows(self) -> None:
        """Test a period that is not a multiple of the window is rejected."""
        with pytest.raises(ScenarioSpecError):
            build_suite(SuiteSpec(episodes=2, period=5.0, window=2.0), seed=0)

    def test_suite_calm_episodes(self) -> None:
        """Test calm episodes raise the cruise speed for half an episode."""
        scenario = build_suite(SuiteSpec(episodes=2, calm_rate=1.0), seed=0)

        np.testing.assert_allclose(
            scenario.speed_profile,
            [
                (0.0, 15.0),
                (0.2, 21.0),
                (5.0, 21.0),
                (5.2, 15.0),
                (10.0, 15.0),
                (10.2, 21.0),
                (15.0, 21.0),
                (15.2, 15.0),
            ],
        )
        cut_ins = [v for v in scenario.vehicles if v.maneuver == "cut_in"]
        assert all(v.dv >= 8.0 for v in cut_ins)

    def test_calm_episodes_need_no_braking(self) -> None:
        """Test the host accelerates through the response horizon of calm cut-ins."""
        suite = SuiteSpec(episodes=3, calm_rate=1.0, noise=SILENT)

        records = generate_synthetic(build_suite(suite, seed=4), 0)

        for episode in range(3):
            crossing = episode * suite.period + 1.5 * suite.window
            horizon = [
                r.ax for r in records if crossing <= r.timestamp <= crossing + 1.5
            ]
            assert horizon
            assert min(horizon) > 0.0

    def test_host_slows_to_lower_cruise_speed(self) -> None:
        """Test the host decelerates gently when the cruise speed drops."""
        spec = ScenarioSpec(
            duration=10.0,
            host_speed=15.0,
            speed_profile=((0.0, 15.0), (0.5, 10.0)),
            noise=SILENT,
        )

        records = generate_synthetic(spec, 0)

        assert -1.2 - 1e-9 <= min(r.ax for r in records) < -1.0
        assert records[-1].vx < 11.0

    def test_suite_calm_rate_out_of_range(self) -> None:
        """Test a calm rate above one is rejected."""
        with pytest.raises(ScenarioSpecError) as exc_info:
            build_suite(SuiteSpec(episodes=2, calm_rate=1.5), seed=0)

        assert "calm_rate must lie in [0, 1]" in str(exc_info.value)
