"""Bird's-eye scene frames and interactive scene extraction.

This module turns log records into host-centred frames with per-track lane
indices, cuts frame sequences into qualifying lane-change scenes and reads the
lane-change vehicle feature used by the vector baseline.
"""

from __future__ import annotations

from riskgraph.scenes.birds_eye import (
    integrate_trajectory,
    lane_boundaries,
    lane_index,
    road_map,
    to_birds_eye,
)
from riskgraph.scenes.exceptions import (
    ExtractionError,
    SceneError,
    TrajectoryParameterError,
)
from riskgraph.scenes.extraction import (
    DEFAULT_HORIZON,
    DEFAULT_PERSISTENCE,
    DEFAULT_STRAIGHT_TOL,
    DEFAULT_WINDOW,
    LaneChange,
    check_scene,
    extract_scenes,
    find_lane_change,
    vrm_feature,
    vrm_matrix,
)
from riskgraph.scenes.scene_models import (
    DroppedTrack,
    DropReason,
    Scene,
    SceneFrame,
    VrmFeature,
)

__all__ = [
    "DEFAULT_HORIZON",
    "DEFAULT_PERSISTENCE",
    "DEFAULT_STRAIGHT_TOL",
    "DEFAULT_WINDOW",
    "DropReason",
    "DroppedTrack",
    "ExtractionError",
    "LaneChange",
    "Scene",
    "SceneError",
    "SceneFrame",
    "TrajectoryParameterError",
    "VrmFeature",
    "check_scene",
    "extract_scenes",
    "find_lane_change",
    "integrate_trajectory",
    "lane_boundaries",
    "lane_index",
    "road_map",
    "to_birds_eye",
    "vrm_feature",
    "vrm_matrix",
]
