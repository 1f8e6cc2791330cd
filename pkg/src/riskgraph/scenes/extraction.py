"""Interactive scene extraction and the lane-change vehicle feature.

A window of frames qualifies as a scene when the host drives straight through
the whole window, some surrounding vehicle changes lane inside it, and at least
two surrounding vehicles are visible when that change happens.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from riskgraph.scenes.exceptions import ExtractionError
from riskgraph.scenes.scene_models import Scene, SceneFrame, VrmFeature

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 50
DEFAULT_STRAIGHT_TOL = 0.02
DEFAULT_PERSISTENCE = 5
DEFAULT_HORIZON = 1.5


@dataclass(frozen=True)
class LaneChange:
    """First persistent lane change found in a window."""

    offset: int
    track_id: int


def find_lane_change(
    frames: Sequence[SceneFrame], persistence: int = DEFAULT_PERSISTENCE
) -> LaneChange | None:
    """Earliest lane change that persists for ``persistence`` frames.

    A track's reference lane is the lane it occupies in the first frame of the
    window where it is visible. The change starts at the first frame of a run of
    ``persistence`` consecutive frames in which the track is visible in another
    lane. Ties between tracks go to the smallest track id.
    """
    initial: dict[int, int] = {}
    run_start: dict[int, int] = {}
    run_length: dict[int, int] = {}
    best: LaneChange | None = None
    for offset, frame in enumerate(frames):
        visible = set()
        for track, lane in zip(frame.tracks, frame.lane_indices):
            visible.add(track.track_id)
            reference = initial.setdefault(track.track_id, lane)
            if lane != reference:
                if run_length.get(track.track_id, 0) == 0:
                    run_start[track.track_id] = offset
                run_length[track.track_id] = run_length.get(track.track_id, 0) + 1
                if run_length[track.track_id] == persistence:
                    found = LaneChange(run_start[track.track_id], track.track_id)
                    if best is None or (found.offset, found.track_id) < (
                        best.offset,
                        best.track_id,
                    ):
                        best = found
            else:
                run_length[track.track_id] = 0
        for track_id in run_length:
            if track_id not in visible:
                run_length[track_id] = 0
    return best


def response_window(
    frames: Sequence[SceneFrame], start: int, horizon: float = DEFAULT_HORIZON
) -> int:
    """Index of the strongest deceleration within ``horizon`` seconds of start."""
    t_end = frames[start].t + horizon + 1e-9
    best = start
    index = start
    while index < len(frames) and frames[index].t <= t_end:
        if frames[index].host_ax < frames[best].host_ax:
            best = index
        index += 1
    return best


def extract_scenes(
    frames: Sequence[SceneFrame],
    window: int = DEFAULT_WINDOW,
    straight_tol: float = DEFAULT_STRAIGHT_TOL,
    *,
    persistence: int = DEFAULT_PERSISTENCE,
    horizon: float = DEFAULT_HORIZON,
    source: str = "log",
) -> list[Scene]:
    """Cut a frame sequence into non-overlapping windows and keep the scenes.

    Args:
        frames: Bird's-eye frames in time order
        window: Frames per window; windows are taken with stride ``window``
        straight_tol: Largest steering magnitude in radians counted as straight
        persistence: Consecutive frames a lane change must last
        horizon: Seconds after the anchor over which the response is taken
        source: Prefix of the scene identifiers

    Returns:
        Scenes in time order; may be empty

    Raises:
        ExtractionError: If window is below 2 or persistence exceeds window
    """
    if window < 2:
        raise ExtractionError(f"Window must hold at least 2 frames, got {window}.")
    if not 1 <= persistence <= window:
        raise ExtractionError(
            f"Persistence {persistence} must lie between 1 and the window {window}."
        )

    scenes: list[Scene] = []
    rejected = {"unusable": 0, "steering": 0, "no_lane_change": 0, "too_few": 0}
    for start in range(0, len(frames) - window + 1, window):
        chunk = frames[start : start + window]
        if not all(frame.usable for frame in chunk):
            rejected["unusable"] += 1
            continue
        if any(abs(frame.steer) >= straight_tol for frame in chunk):
            rejected["steering"] += 1
            continue
        change = find_lane_change(chunk, persistence)
        if change is None:
            rejected["no_lane_change"] += 1
            continue
        if len(chunk[change.offset].tracks) < 2:
            rejected["too_few"] += 1
            continue

        peak = response_window(frames, start + change.offset, horizon)
        scenes.append(
            Scene(
                scene_id=f"{source}-{start:07d}",
                frames=tuple(chunk),
                anchor=change.offset,
                lane_change_track=change.track_id,
                response_ax=frames[peak].host_ax,
                response_op=frames[peak].operation(),
            )
        )

    logger.info(
        "Extracted %d scenes from %d frames (rejected windows: %s)",
        len(scenes),
        len(frames),
        ", ".join(f"{k}={v}" for k, v in rejected.items()),
    )
    return scenes


def check_scene(
    scene: Scene,
    straight_tol: float = DEFAULT_STRAIGHT_TOL,
    persistence: int = DEFAULT_PERSISTENCE,
) -> list[str]:
    """Re-checks the extraction criteria on a scene.

    Returns:
        Descriptions of the violated criteria; empty when the scene qualifies
    """
    problems: list[str] = []
    if any(abs(frame.steer) >= straight_tol for frame in scene.frames):
        problems.append("host is not driving straight")
    if len(scene.anchor_frame.tracks) < 2:
        problems.append("fewer than two surrounding vehicles at the anchor")
    change = find_lane_change(scene.frames, persistence)
    if change is None:
        problems.append("no surrounding vehicle changes lane")
    elif (change.offset, change.track_id) != (scene.anchor, scene.lane_change_track):
        problems.append(
            f"lane change found at frame {change.offset} of track {change.track_id}"
        )
    return problems


def vrm_feature(scene: Scene) -> VrmFeature:
    """Relative state of the lane-changing vehicle at the anchor frame.

    Raises:
        ExtractionError: If the lane-change track is not visible at the anchor
    """
    track = scene.anchor_frame.track(scene.lane_change_track)
    if track is None:
        raise ExtractionError(
            f"Lane-change track {scene.lane_change_track} is not visible at the "
            f"anchor frame of scene {scene.scene_id}."
        )
    return VrmFeature(dx=track.dx, dy=track.dy, dvx=track.dvx, dvy=track.dvy)


def vrm_matrix(scenes: Sequence[Scene]) -> npt.NDArray[np.float64]:
    """Stacks the lane-change features of many scenes into an n×4 matrix."""
    if not scenes:
        return np.zeros((0, 4))
    return np.array([vrm_feature(s).as_tuple() for s in scenes], dtype=np.float64)
