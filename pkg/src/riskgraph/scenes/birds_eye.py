"""Host-centred bird's-eye transform and host trajectory integration."""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt
import pandas as pd
from scipy.integrate import cumulative_trapezoid

from riskgraph.ingest.log_models import SAMPLE_INTERVAL, DriverLogRecord
from riskgraph.scenes.exceptions import TrajectoryParameterError
from riskgraph.scenes.scene_models import (
    GRID_DY_MAX,
    DroppedTrack,
    DropReason,
    SceneFrame,
)

logger = logging.getLogger(__name__)


def lane_boundaries(
    lane_offsets: Sequence[float],
) -> tuple[float, float, float, float] | None:
    """Lateral boundaries of lanes 1, 2 and 3 around the host.

    The host lane is bounded by the nearest detected line on each side of the
    host. The outer lanes use the next detected line outward, or the host-lane
    width when that line was not detected.

    Args:
        lane_offsets: Detected lane lines, left to right, host frame

    Returns:
        (left of lane 1, left of lane 2, left of lane 3, right of lane 3), or
        None when fewer than two lines are detected or the host is not between
        two of them
    """
    lines = sorted(lane_offsets)
    if len(lines) < 2:
        return None
    left = [x for x in lines if x <= 0.0]
    right = [x for x in lines if x > 0.0]
    if not left or not right:
        return None
    host_left, host_right = left[-1], right[0]
    width = host_right - host_left
    outer_left = left[-2] if len(left) >= 2 else host_left - width
    outer_right = right[1] if len(right) >= 2 else host_right + width
    return outer_left, host_left, host_right, outer_right


def lane_index(dx: float, boundaries: tuple[float, float, float, float]) -> int | None:
    """Lane 1..3 containing lateral position dx; each lane is [left, right)."""
    for lane in range(3):
        if boundaries[lane] <= dx < boundaries[lane + 1]:
            return lane + 1
    return None


def to_birds_eye(record: DriverLogRecord) -> SceneFrame:
    """Transform a log record into a host-centred bird's-eye frame.

    Tracks behind the host, at or beyond 100 m, or outside the three lanes are
    dropped; each drop is recorded with its reason. A record with fewer than
    two usable lane lines yields a frame flagged unusable with no tracks.

    Args:
        record: Log record

    Returns:
        SceneFrame with every retained track assigned a lane index
    """
    boundaries = lane_boundaries(record.lane_offsets)
    kept = []
    lanes: list[int] = []
    dropped: list[DroppedTrack] = []
    for track in record.tracks:
        reason: DropReason | None = None
        lane: int | None = None
        if boundaries is None:
            reason = DropReason.NO_LANE_GEOMETRY
        elif track.dy < 0.0:
            reason = DropReason.BEHIND_HOST
        elif track.dy >= GRID_DY_MAX:
            reason = DropReason.BEYOND_RANGE
        else:
            lane = lane_index(track.dx, boundaries)
            if lane is None:
                reason = DropReason.OUTSIDE_LANES
        if reason is not None or lane is None:
            dropped.append(
                DroppedTrack(track.track_id, reason or DropReason.OUTSIDE_LANES)
            )
            continue
        kept.append(track)
        lanes.append(lane)

    return SceneFrame(
        t=record.timestamp,
        host_speed=record.vx,
        host_ax=record.ax,
        host_ay=record.ay,
        steer=record.steer,
        brake=record.brake,
        throttle=record.throttle,
        lane_offsets=record.lane_offsets,
        tracks=tuple(kept),
        lane_indices=tuple(lanes),
        usable=boundaries is not None,
        dropped=tuple(dropped),
    )


def integrate_trajectory(
    vx_seq: Sequence[float] | npt.ArrayLike,
    vy_seq: Sequence[float] | npt.ArrayLike,
    dt: float = SAMPLE_INTERVAL,
) -> npt.NDArray[np.float64]:
    """Integrate host velocities into world positions with the trapezoid rule.

    The longitudinal velocity vx advances the world y coordinate and the
    lateral velocity vy advances the world x coordinate, so the world frame
    matches the host frame at the start of the log.

    Args:
        vx_seq: Longitudinal velocities in m/s
        vy_seq: Lateral velocities in m/s
        dt: Sample interval in seconds

    Returns:
        n×2 array of (x, y) positions starting at the origin

    Raises:
        TrajectoryParameterError: If the input is empty, the lengths differ or
            dt is not positive

    Example:
        >>> integrate_trajectory([10.0] * 26, [0.0] * 26, 0.04)[-1]
        array([ 0., 10.])
    """
    vx = np.asarray(vx_seq, dtype=np.float64)
    vy = np.asarray(vy_seq, dtype=np.float64)
    if vx.size == 0:
        raise TrajectoryParameterError("Cannot integrate an empty velocity sequence.")
    if vx.shape != vy.shape:
        raise TrajectoryParameterError(
            f"Velocity sequences differ in length: {vx.size} and {vy.size}."
        )
    if dt <= 0:
        raise TrajectoryParameterError(f"Sample interval must be positive, got {dt}.")
    x = cumulative_trapezoid(vy, dx=dt, initial=0.0)
    y = cumulative_trapezoid(vx, dx=dt, initial=0.0)
    return np.column_stack([x, y])


def road_map(
    records: Sequence[DriverLogRecord], dt: float = SAMPLE_INTERVAL
) -> pd.DataFrame:
    """World-frame road structure from the host path and detected lane lines.

    Lane lines are placed laterally beside the integrated host position at every
    sample, giving one polyline per lane-line slot.

    Args:
        records: Log records in time order
        dt: Sample interval in seconds

    Returns:
        DataFrame with columns t, host_x, host_y and line_0..line_{m-1}; a
        missing lane line is NaN
    """
    positions = integrate_trajectory(
        [r.vx for r in records], [r.vy for r in records], dt
    )
    slots = max(len(r.lane_offsets) for r in records)
    lines = np.full((len(records), slots), np.nan)
    for i, record in enumerate(records):
        for j, offset in enumerate(record.lane_offsets):
            lines[i, j] = positions[i, 0] + offset
    frame = pd.DataFrame(
        {
            "t": [r.timestamp for r in records],
            "host_x": positions[:, 0],
            "host_y": positions[:, 1],
        }
    )
    for j in range(slots):
        frame[f"line_{j}"] = lines[:, j]
    logger.debug("Built road map over %d samples", len(records))
    return frame
