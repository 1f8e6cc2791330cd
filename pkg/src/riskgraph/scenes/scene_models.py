"""Data models for bird's-eye frames and extracted scenes."""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass
from enum import Enum
from typing import Any

from riskgraph.ingest.log_models import TrackObservation
from riskgraph.labels.label_models import OpFeature
from riskgraph.scenes.exceptions import ExtractionError, SceneError

GRID_DY_MAX = 100.0
LANE_COUNT = 3


class DropReason(Enum):
    """Why a track did not make it into a bird's-eye frame."""

    BEHIND_HOST = "behind_host"
    BEYOND_RANGE = "beyond_range"
    OUTSIDE_LANES = "outside_lanes"
    NO_LANE_GEOMETRY = "no_lane_geometry"


@dataclass(frozen=True)
class DroppedTrack:
    track_id: int
    reason: DropReason

    def to_dict(self) -> dict[str, Any]:
        return {"track_id": self.track_id, "reason": self.reason.value}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> DroppedTrack:
        return cls(track_id=int(data["track_id"]), reason=DropReason(data["reason"]))


@dataclass(frozen=True)
class SceneFrame:
    """Host-centred bird's-eye snapshot.

    The host sits at the origin of the frame in lane 2. Every retained track
    lies ahead of the host within 100 m and carries the lane it occupies.

    Attributes:
        t: Sample time in seconds
        host_speed: Host longitudinal speed in m/s
        host_ax: Host longitudinal acceleration in m/s²
        host_ay: Host lateral acceleration in m/s²
        steer: Front-wheel angle in radians
        brake: Brake signal in [0, 1]
        throttle: Throttle opening in [0, 1]
        lane_offsets: Detected lane lines, as in the source record
        tracks: Retained surrounding vehicles
        lane_indices: Lane 1..3 of every retained track, aligned with ``tracks``
        usable: False when the lane geometry could not be resolved
        dropped: Tracks removed from the frame and the rule that removed them
    """

    t: float
    host_speed: float
    host_ax: float
    host_ay: float
    steer: float
    brake: float
    throttle: float
    lane_offsets: tuple[float, ...] = ()
    tracks: tuple[TrackObservation, ...] = ()
    lane_indices: tuple[int, ...] = ()
    usable: bool = True
    dropped: tuple[DroppedTrack, ...] = ()

    def __post_init__(self) -> None:
        if len(self.tracks) != len(self.lane_indices):
            raise SceneError(
                f"Frame at t={self.t} has {len(self.tracks)} tracks but "
                f"{len(self.lane_indices)} lane indices."
            )
        ids = [track.track_id for track in self.tracks]
        if len(ids) != len(set(ids)):
            raise SceneError(f"Frame at t={self.t} repeats a track identifier.")
        if any(not 1 <= lane <= LANE_COUNT for lane in self.lane_indices):
            raise SceneError(f"Frame at t={self.t} has a lane index outside 1..3.")
        if any(not 0.0 <= track.dy < GRID_DY_MAX for track in self.tracks):
            raise SceneError(f"Frame at t={self.t} keeps a track outside [0, 100) m.")

    def track(self, track_id: int) -> TrackObservation | None:
        for track in self.tracks:
            if track.track_id == track_id:
                return track
        return None

    def lane_index_of(self, track_id: int) -> int:
        """Lane 1..3 of a retained track.

        Raises:
            SceneError: If the track is not in the frame
        """
        for track, lane in zip(self.tracks, self.lane_indices):
            if track.track_id == track_id:
                return lane
        raise SceneError(f"Track {track_id} is not visible at t={self.t}.")

    def operation(self) -> OpFeature:
        return OpFeature(
            ax=self.host_ax,
            ay=self.host_ay,
            steer=self.steer,
            brake=self.brake,
            throttle=self.throttle,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "t": self.t,
            "host_speed": self.host_speed,
            "host_ax": self.host_ax,
            "host_ay": self.host_ay,
            "steer": self.steer,
            "brake": self.brake,
            "throttle": self.throttle,
            "lane_offsets": list(self.lane_offsets),
            "tracks": [
                {**track.to_dict(), "lane_index": lane}
                for track, lane in zip(self.tracks, self.lane_indices)
            ],
            "usable": self.usable,
            "dropped": [d.to_dict() for d in self.dropped],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> SceneFrame:
        tracks = data.get("tracks", ())
        return cls(
            t=float(data["t"]),
            host_speed=float(data["host_speed"]),
            host_ax=float(data["host_ax"]),
            host_ay=float(data["host_ay"]),
            steer=float(data["steer"]),
            brake=float(data["brake"]),
            throttle=float(data["throttle"]),
            lane_offsets=tuple(float(v) for v in data.get("lane_offsets", ())),
            tracks=tuple(TrackObservation.from_dict(t) for t in tracks),
            lane_indices=tuple(int(t["lane_index"]) for t in tracks),
            usable=bool(data.get("usable", True)),
            dropped=tuple(DroppedTrack.from_dict(d) for d in data.get("dropped", ())),
        )


@dataclass(frozen=True)
class Scene:
    """A window of frames around one lane change of a surrounding vehicle.

    Attributes:
        scene_id: Identifier, unique within a run
        frames: Contiguous window of frames
        anchor: Index in ``frames`` of the frame the lane change materialises at
        lane_change_track: Track whose lane index changes in the window
        response_ax: Strongest host acceleration over the response horizon
        response_op: Host operation signals at the instant of ``response_ax``
    """

    scene_id: str
    frames: tuple[SceneFrame, ...]
    anchor: int
    lane_change_track: int
    response_ax: float
    response_op: OpFeature

    def __post_init__(self) -> None:
        if not self.frames:
            raise ExtractionError(f"Scene {self.scene_id} has no frames.")
        if not 0 <= self.anchor < len(self.frames):
            raise ExtractionError(
                f"Scene {self.scene_id} anchor {self.anchor} is outside its "
                f"{len(self.frames)} frames."
            )
        if len(self.frames[self.anchor].tracks) < 2:
            raise ExtractionError(
                f"Scene {self.scene_id} shows fewer than two surrounding vehicles "
                f"at its anchor frame."
            )
        if not math.isfinite(self.response_ax):
            raise ExtractionError(f"Scene {self.scene_id} has a non-finite response.")

    @property
    def anchor_frame(self) -> SceneFrame:
        return self.frames[self.anchor]

    def to_dict(self) -> dict[str, Any]:
        return {
            "scene_id": self.scene_id,
            "anchor": self.anchor,
            "lane_change_track": self.lane_change_track,
            "response_ax": self.response_ax,
            "response_op": self.response_op.to_dict(),
            "frames": [frame.to_dict() for frame in self.frames],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Scene:
        return cls(
            scene_id=str(data["scene_id"]),
            frames=tuple(SceneFrame.from_dict(f) for f in data["frames"]),
            anchor=int(data["anchor"]),
            lane_change_track=int(data["lane_change_track"]),
            response_ax=float(data["response_ax"]),
            response_op=OpFeature.from_dict(data["response_op"]),
        )


@dataclass(frozen=True)
class VrmFeature:
    """Relative state of the lane-changing vehicle at the anchor frame."""

    dx: float
    dy: float
    dvx: float
    dvy: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.dx, self.dy, self.dvx, self.dvy)):
            raise ExtractionError("Lane-change feature has non-finite components.")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.dx, self.dy, self.dvx, self.dvy)
