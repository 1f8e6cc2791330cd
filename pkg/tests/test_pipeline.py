"""Tests for configuration, stage artifacts and the end-to-end run."""

from __future__ import annotations

import json
import tempfile
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import pytest

from riskgraph.classify import train_svm
from riskgraph.kernels import linear_gram
from riskgraph.labels import DegenerateLabelError, FeatureSet, RiskLabelSet
from riskgraph.pipeline import (
    ArtifactError,
    ConfigError,
    StageError,
    StaleArtifactError,
    check_stale,
    config_from_dict,
    digest_of,
    load_config,
    load_frames,
    load_graphs,
    load_labels,
    load_model,
    load_records,
    load_scenes,
    read_csv,
    read_json,
    read_jsonl,
    run_pipeline,
    run_stage,
    save_frames,
    save_graphs,
    save_labels,
    save_model,
    save_records,
    save_scenes,
    stored_digest,
    write_csv,
    write_json,
    write_jsonl,
)
from tests.builders import graph_from, make_frame, make_record, make_scene

RESOURCES = Path(__file__).parent.parent / "resources"

QUIET_NOISE = {
    "ax": 0.0,
    "ay": 0.0,
    "steer": 0.0,
    "lateral_speed": 0.0,
    "lane": 0.0,
    "track": 0.0,
}


def _config_data(**overrides: Any) -> dict[str, Any]:
    data: dict[str, Any] = {
        "output_dir": "out",
        "drivers": [{"driver_id": "A", "synth_seed": 1}],
    }
    data.update(overrides)
    return data


class TestConfig:
    """Tests for loading and validating run configurations."""

    def test_defaults(self) -> None:
        """Test a minimal configuration fills every stage with defaults."""
        config = config_from_dict(_config_data(), Path("/runs"))

        assert config.output_dir == Path("/runs/out")
        assert config.scenes.window == 50
        assert config.labels.features is FeatureSet.ONE
        assert config.labels.candidates == range(2, 11)
        assert config.drivers[0].profile.driver_id == "A"

    def test_missing_drivers(self) -> None:
        """Test a configuration without drivers is rejected."""
        with pytest.raises(ConfigError) as exc_info:
            config_from_dict({"output_dir": "out"})

        assert "Missing required field drivers" in str(exc_info.value)
        assert exc_info.value.exit_code == 2

    def test_unknown_field_is_named(self) -> None:
        """Test an unknown field is reported with its section."""
        with pytest.raises(ConfigError) as exc_info:
            config_from_dict(_config_data(labels={"kk": 3}))

        assert "Unknown field labels.kk" in str(exc_info.value)

    def test_driver_without_input(self) -> None:
        """Test a driver needs a log or a synthetic seed."""
        drivers = [{"driver_id": "A", "synth_seed": 1}, {"driver_id": "B"}]

        with pytest.raises(ConfigError) as exc_info:
            config_from_dict(_config_data(drivers=drivers))

        assert "drivers[1].synth_seed" in str(exc_info.value)

    def test_driver_with_both_inputs(self) -> None:
        """Test a driver may not give a log and a seed together."""
        drivers = [{"driver_id": "A", "synth_seed": 1, "log": "a.csv"}]

        with pytest.raises(ConfigError):
            config_from_dict(_config_data(drivers=drivers))

    def test_duplicate_driver(self) -> None:
        """Test driver identifiers must be unique."""
        drivers = [
            {"driver_id": "A", "synth_seed": 1},
            {"driver_id": "A", "synth_seed": 2},
        ]

        with pytest.raises(ConfigError) as exc_info:
            config_from_dict(_config_data(drivers=drivers))

        assert "duplicate driver_id A" in str(exc_info.value)

    def test_invalid_k_range(self) -> None:
        """Test the candidate cluster counts start at 2."""
        with pytest.raises(ConfigError) as exc_info:
            config_from_dict(_config_data(labels={"k_range": [1, 5]}))

        assert "labels.k_range" in str(exc_info.value)

    def test_invalid_c(self) -> None:
        """Test the regularisation constant must be positive."""
        with pytest.raises(ConfigError) as exc_info:
            config_from_dict(_config_data(classify={"C": -1.0}))

        assert "classify.C must be positive" in str(exc_info.value)

    def test_invalid_value_type(self) -> None:
        """Test a value that cannot be converted names its field."""
        with pytest.raises(ConfigError) as exc_info:
            config_from_dict(_config_data(labels={"features": "three"}))

        assert "labels.features" in str(exc_info.value)

    def test_auto_k(self) -> None:
        """Test k = "auto" leaves the cluster count to the silhouette choice."""
        config = config_from_dict(_config_data(labels={"k": "auto"}))

        assert config.labels.k is None

    def test_demo_configuration(self) -> None:
        """Test the bundled configuration loads three synthetic drivers."""
        config = load_config(RESOURCES / "demo.toml")

        assert [d.driver_id for d in config.drivers] == ["A", "B", "C"]
        assert config.drivers[0].profile.max_decel == 7.0
        assert config.drivers[2].profile.driver_id == "C"
        expected = (RESOURCES.parent / "runs" / "demo").resolve()
        assert config.output_dir.resolve() == expected

    def test_json_configuration(self) -> None:
        """Test a JSON file loads like TOML with paths relative to the file."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "run.json"
            path.write_text(json.dumps(_config_data()))
            config = load_config(path)

        assert config.output_dir == Path(tmp).resolve() / "out"

    def test_missing_file(self) -> None:
        """Test a missing configuration file is reported."""
        with pytest.raises(ConfigError) as exc_info:
            load_config(Path("/nonexistent/run.toml"))

        assert "Configuration file not found" in str(exc_info.value)

    def test_unsupported_format(self) -> None:
        """Test only TOML and JSON are accepted."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "run.yaml"
            path.write_text("output_dir: out\n")
            with pytest.raises(ConfigError) as exc_info:
                load_config(path)

        assert "Unsupported configuration format '.yaml'" in str(exc_info.value)

    def test_malformed_toml(self) -> None:
        """Test a TOML syntax error is reported as a configuration error."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "run.toml"
            path.write_text("output_dir = \n")
            with pytest.raises(ConfigError):
                load_config(path)


class TestDigest:
    """Tests for configuration digests."""

    def test_length_and_order(self) -> None:
        """Test digests are 16 hex characters and ignore key order."""
        first = digest_of({"a": 1, "b": [1, 2]})

        assert len(first) == 16
        assert int(first, 16) >= 0
        assert first == digest_of({"b": [1, 2], "a": 1})
        assert first != digest_of({"a": 2, "b": [1, 2]})

    def test_configuration_digest(self) -> None:
        """Test equal configurations share a digest and a changed seed does not."""
        base = config_from_dict(_config_data(), Path("/runs"))
        same = config_from_dict(_config_data(), Path("/runs"))
        other = config_from_dict(_config_data(classify={"seed": 4}), Path("/runs"))

        assert base.digest() == same.digest()
        assert base.digest() != other.digest()

    def test_output_location_not_digested(self) -> None:
        """Test the same settings written to two folders share a digest."""
        first = config_from_dict(_config_data(), Path("/runs/a"))
        second = config_from_dict(_config_data(), Path("/runs/b"))

        assert first.output_dir != second.output_dir
        assert first.digest() == second.digest()


class TestArtifacts:
    """Tests for digest-stamped artifacts."""

    def test_json_round_trip(self) -> None:
        """Test a JSON artifact keeps its payload and digest."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "nested" / "a.json"
            write_json(path, {"value": 3}, "d1")
            payload, digest = read_json(path)

        assert payload == {"value": 3}
        assert digest == "d1"

    def test_stale_artifact_refused(self) -> None:
        """Test an artifact of another configuration is not overwritten."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "a.json"
            write_json(path, {"value": 3}, "old")
            with pytest.raises(StaleArtifactError) as exc_info:
                write_json(path, {"value": 4}, "new")
            payload, _ = read_json(path)

        assert exc_info.value.stored == "old"
        assert exc_info.value.expected == "new"
        assert exc_info.value.exit_code == 9
        assert payload == {"value": 3}

    def test_force_overwrites(self) -> None:
        """Test forcing replaces an artifact of another configuration."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "a.json"
            write_json(path, {"value": 3}, "old")
            write_json(path, {"value": 4}, "new", force=True)
            payload, digest = read_json(path)

        assert payload == {"value": 4}
        assert digest == "new"

    def test_same_digest_rewrites(self) -> None:
        """Test an artifact of the same configuration is simply rewritten."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "a.json"
            write_json(path, {"value": 3}, "d")
            check_stale(path, "d")
            write_json(path, {"value": 5}, "d")

            assert read_json(path)[0] == {"value": 5}

    def test_jsonl_kind_checked(self) -> None:
        """Test reading JSON-Lines rows of another kind is refused."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "rows.jsonl"
            count = write_jsonl(path, "graphs", [{"a": 1}, {"a": 2}], "d")
            rows, digest = read_jsonl(path, "graphs")
            with pytest.raises(ArtifactError) as exc_info:
                read_jsonl(path, "scenes")

        assert count == 2
        assert rows == [{"a": 1}, {"a": 2}]
        assert digest == "d"
        assert "expected 'scenes'" in str(exc_info.value)

    def test_csv_digest_line(self) -> None:
        """Test CSV artifacts start with the digest comment."""
        frame = pd.DataFrame({"k": [2, 3], "rss": [1.5, 0.5]})

        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "t.csv"
            write_csv(path, frame, "abc")
            first = path.read_text().splitlines()[0]
            loaded, digest = read_csv(path)

        assert first == "# config_digest=abc"
        assert digest == "abc"
        pd.testing.assert_frame_equal(loaded, frame)

    def test_unknown_suffix(self) -> None:
        """Test a file of unknown type has no digest."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "notes.txt"
            path.write_text("hello")
            with pytest.raises(ArtifactError):
                stored_digest(path)

    def test_missing_artifact(self) -> None:
        """Test loading a missing artifact is reported."""
        with pytest.raises(ArtifactError) as exc_info:
            load_scenes(Path("/nonexistent/scenes.jsonl"))

        assert "Artifact not found" in str(exc_info.value)

    def test_domain_round_trips(self) -> None:
        """Test records, frames, scenes, graphs, labels and models reload equal."""
        records = [make_record(0.0, tracks=[(1, 1, 10.0)]), make_record(0.04)]
        frames = [make_frame(0.0, [(1, 2, 12.0)]), make_frame(0.04)]
        scenes = [make_scene("s-1", -2.0), make_scene("s-2", 0.5)]
        graphs = [graph_from([2, 1], [(0, 1)], "s-1")]
        labels = RiskLabelSet(("s-1", "s-2"), (1, 2), k=1, centroid_ax=(-2.0,))
        model = train_svm(linear_gram(np.array([[1.0, 0.0], [-1.0, 0.0]])), [1, 2])

        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp)
            save_records(root / "records.jsonl", records, "d")
            save_frames(root / "frames.jsonl", frames, "d")
            save_scenes(root / "scenes.jsonl", scenes, "d")
            save_graphs(root / "graphs.jsonl", graphs, "d")
            save_labels(root / "labels.json", labels, "d")
            save_model(root / "model.json", model, "d")

            assert load_records(root / "records.jsonl") == (records, "d")
            assert load_frames(root / "frames.jsonl") == (frames, "d")
            assert load_scenes(root / "scenes.jsonl") == (scenes, "d")
            assert load_graphs(root / "graphs.jsonl") == (graphs, "d")
            assert load_labels(root / "labels.json") == (labels, "d")
            assert load_model(root / "model.json") == (model, "d")

    def test_malformed_entry(self) -> None:
        """Test a stored entry missing fields is reported."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "scenes.jsonl"
            write_jsonl(path, "scenes", [{"scene_id": "s"}], "d")
            with pytest.raises(ArtifactError) as exc_info:
                load_scenes(path)

        assert "malformed entry" in str(exc_info.value)


class TestRunStage:
    """Tests for stage error wrapping."""

    def test_error_names_stage(self) -> None:
        """Test a failing stage is named and keeps the cause's exit code."""

        def fail() -> None:
            raise DegenerateLabelError("no braking")

        with pytest.raises(StageError) as exc_info:
            run_stage("label", fail)

        assert exc_info.value.stage == "label"
        assert exc_info.value.exit_code == 7
        assert "Stage 'label' failed: no braking" in str(exc_info.value)

    def test_result_passed_through(self) -> None:
        """Test a successful stage returns its value."""
        assert run_stage("graphs", lambda: 42) == 42

    def test_foreign_errors_propagate(self) -> None:
        """Test errors outside the package family are not wrapped."""

        def fail() -> None:
            raise ValueError("boom")

        with pytest.raises(ValueError):
            run_stage("gram", fail)


class TestRunPipeline:
    """Tests for the end-to-end run on a synthetic driver."""

    def _config(self, root: Path, episodes: int) -> Any:
        return config_from_dict(
            {
                "output_dir": "out",
                "suite": {
                    "episodes": episodes,
                    "gap_modes": [8.0, 20.0, 60.0],
                    "noise": QUIET_NOISE,
                },
                "labels": {"k": 2, "k_range": [2, 4]},
                "classify": {"folds": 2, "fractions": [0.5, 1.0]},
                "drivers": [{"driver_id": "A", "synth_seed": 3}],
            },
            root,
        )

    def test_full_run(self) -> None:
        """Test every stage runs and leaves its artifacts behind."""
        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp)
            config = self._config(root, episodes=30)

            report = run_pipeline(config)

            out = root / "out"
            driver_dir = out / "A"
            expected = [
                "log.csv",
                "records.jsonl",
                "scenes.jsonl",
                "labels.json",
                "k_selection.json",
                "graphs.jsonl",
                "gram_spgk.bin",
                "gram_nhgk.bin",
                "model_spgk.json",
                "model_nhgk.json",
                "report.json",
                "figures/learning_curve.csv",
                "figures/road_map.csv",
                "figures/histograms.csv",
                "figures/accuracy.csv",
            ]
            missing = [name for name in expected if not (driver_dir / name).is_file()]
            comparison, digest = read_csv(out / "accuracy.csv")
            labels, labels_digest = load_labels(driver_dir / "labels.json")
            scenes, _ = load_scenes(driver_dir / "scenes.jsonl")

        assert missing == []
        assert digest == config.digest()
        assert labels_digest == config.digest()
        result = report.drivers[0]
        assert result.scene_count > 0
        assert result.k == 2
        assert sum(result.level_counts.values()) == result.scene_count
        assert labels.level_count == 3
        level_of = dict(zip(labels.scene_refs, labels.levels))
        calm = [s.scene_id for s in scenes if s.response_ax >= 0.0]
        assert result.level_counts[3] > 0
        assert calm
        assert all(level_of[ref] == 3 for ref in calm)
        assert list(comparison.columns) == ["driver", "spgk", "nhgk", "linear"]
        for name in ("spgk", "nhgk", "linear"):
            assert 0.0 <= result.accuracy(name) <= 1.0

    def test_reports_identical_across_runs(self) -> None:
        """Test two runs of one configuration write byte-identical reports."""
        reports = []
        for _ in range(2):
            with tempfile.TemporaryDirectory() as tmp:
                root = Path(tmp)
                run_pipeline(self._config(root, episodes=30))
                reports.append(
                    (
                        (root / "out" / "report.json").read_bytes(),
                        (root / "out" / "A" / "report.json").read_bytes(),
                        (root / "out" / "A" / "labels.json").read_bytes(),
                    )
                )

        assert reports[0] == reports[1]

    def test_graph_kernels_see_the_third_vehicle(self) -> None:
        """Test graph kernels beat lane-change features when a neighbour sets severity.

        Every cut-in closes to the same gap; braking is harder only when a
        vehicle sits beside the host, which the lane-change features omit.
        """
        with tempfile.TemporaryDirectory() as tmp:
            config = config_from_dict(
                {
                    "output_dir": "out",
                    "suite": {
                        "episodes": 40,
                        "gap_modes": [20.0],
                        "gap_spread": 0.5,
                        "third_vehicle_rate": 0.5,
                        "rear_vehicle_rate": 0.0,
                        "calm_rate": 0.0,
                        "noise": QUIET_NOISE,
                    },
                    "labels": {"k": 2, "k_range": [2, 4]},
                    "classify": {"C": 10.0, "folds": 3, "fractions": [1.0]},
                    "drivers": [
                        {
                            "driver_id": "A",
                            "synth_seed": 5,
                            "profile": {"crowding_gain": 0.6},
                        }
                    ],
                },
                Path(tmp),
            )

            result = run_pipeline(config).drivers[0]

        graph_accuracy = min(result.accuracy("spgk"), result.accuracy("nhgk"))
        assert graph_accuracy - result.accuracy("linear") >= 0.10

    def test_stale_output_stops_the_run(self) -> None:
        """Test an existing log of another configuration fails the ingest stage."""
        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp)
            config = self._config(root, episodes=3)
            log = root / "out" / "A" / "log.csv"
            log.parent.mkdir(parents=True)
            log.write_text("# config_digest=0000000000000000\n")

            with pytest.raises(StageError) as exc_info:
                run_pipeline(config)

        assert exc_info.value.stage == "ingest"
        assert isinstance(exc_info.value.cause, StaleArtifactError)
        assert exc_info.value.exit_code == 9
