"""Data models for driving logs.

This module defines the per-sample record of host CAN signals and tracked
surrounding vehicles, together with the column map used to read such records
from CSV.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Any

from riskgraph.ingest.exceptions import IngestError, LogSchemaError

SAMPLE_INTERVAL = 0.04
"""Nominal sample interval in seconds (25 Hz)."""

TRACK_DY_MIN = -30.0
TRACK_DY_MAX = 100.0

REQUIRED_FIELDS: tuple[str, ...] = (
    "timestamp",
    "ax",
    "ay",
    "steer",
    "brake",
    "throttle",
    "vx",
    "vy",
)

CONTINUOUS_CHANNELS: tuple[str, ...] = (
    "ax",
    "ay",
    "steer",
    "brake",
    "throttle",
    "vx",
    "vy",
)


@dataclass(frozen=True)
class TrackObservation:
    """A surrounding vehicle seen by the host sensors at one instant.

    Attributes:
        track_id: Stable identifier of the tracked vehicle
        dx: Lateral relative position in metres, host frame, rightward positive
        dy: Longitudinal relative position in metres, forward positive
        dvx: Lateral relative velocity in m/s
        dvy: Longitudinal relative velocity in m/s
    """

    track_id: int
    dx: float
    dy: float
    dvx: float
    dvy: float

    def __post_init__(self) -> None:
        if not TRACK_DY_MIN <= self.dy <= TRACK_DY_MAX:
            raise IngestError(
                f"Track {self.track_id} has dy={self.dy} m outside the sensing range "
                f"[{TRACK_DY_MIN}, {TRACK_DY_MAX}]."
            )
        values = (self.dx, self.dy, self.dvx, self.dvy)
        if not all(math.isfinite(v) for v in values):
            raise IngestError(f"Track {self.track_id} has non-finite values.")

    def to_dict(self) -> dict[str, Any]:
        return {
            "track_id": self.track_id,
            "dx": self.dx,
            "dy": self.dy,
            "dvx": self.dvx,
            "dvy": self.dvy,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> TrackObservation:
        return cls(
            track_id=int(data["track_id"]),
            dx=float(data["dx"]),
            dy=float(data["dy"]),
            dvx=float(data["dvx"]),
            dvy=float(data["dvy"]),
        )


@dataclass(frozen=True)
class DriverLogRecord:
    """One 25 Hz sample of host signals plus tracked surrounding vehicles.

    Attributes:
        timestamp: Sample time in seconds
        ax: Longitudinal acceleration in m/s²
        ay: Lateral acceleration in m/s²
        steer: Front-wheel angle in radians
        brake: Brake signal in [0, 1]
        throttle: Throttle opening in [0, 1]
        vx: Host longitudinal velocity in m/s
        vy: Host lateral velocity in m/s
        lane_offsets: Lateral positions of the detected lane lines in metres,
            host frame, ordered left to right
        tracks: Surrounding vehicles observed in this sample
        cipv_id: Identifier of the closest-in-path vehicle, if tagged
    """

    timestamp: float
    ax: float
    ay: float
    steer: float
    brake: float
    throttle: float
    vx: float
    vy: float
    lane_offsets: tuple[float, ...] = ()
    tracks: tuple[TrackObservation, ...] = ()
    cipv_id: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.brake <= 1.0:
            raise IngestError(
                f"Brake signal {self.brake} at t={self.timestamp} is outside [0, 1]."
            )
        if not 0.0 <= self.throttle <= 1.0:
            raise IngestError(
                f"Throttle {self.throttle} at t={self.timestamp} is outside [0, 1]."
            )
        ids = [t.track_id for t in self.tracks]
        if len(ids) != len(set(ids)):
            raise IngestError(f"Duplicate track identifiers at t={self.timestamp}.")
        if list(self.lane_offsets) != sorted(self.lane_offsets):
            raise IngestError(
                f"Lane offsets at t={self.timestamp} are not ordered left to right."
            )

    def channel(self, name: str) -> float:
        """Returns the value of a continuous channel by name."""
        if name not in CONTINUOUS_CHANNELS:
            raise IngestError(f"Unknown channel: {name}")
        value: float = getattr(self, name)
        return value

    def to_dict(self) -> dict[str, Any]:
        return {
            "timestamp": self.timestamp,
            "ax": self.ax,
            "ay": self.ay,
            "steer": self.steer,
            "brake": self.brake,
            "throttle": self.throttle,
            "vx": self.vx,
            "vy": self.vy,
            "lane_offsets": list(self.lane_offsets),
            "tracks": [t.to_dict() for t in self.tracks],
            "cipv_id": self.cipv_id,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> DriverLogRecord:
        cipv = data.get("cipv_id")
        return cls(
            timestamp=float(data["timestamp"]),
            ax=float(data["ax"]),
            ay=float(data["ay"]),
            steer=float(data["steer"]),
            brake=float(data["brake"]),
            throttle=float(data["throttle"]),
            vx=float(data["vx"]),
            vy=float(data["vy"]),
            lane_offsets=tuple(float(v) for v in data.get("lane_offsets", ())),
            tracks=tuple(TrackObservation.from_dict(t) for t in data.get("tracks", ())),
            cipv_id=None if cipv is None else int(cipv),
        )


def validate_log(records: Sequence[DriverLogRecord]) -> None:
    """Checks the cross-record invariant: timestamps strictly increase.

    Raises:
        IngestError: If two consecutive records are out of order
    """
    for previous, current in zip(records, records[1:]):
        if current.timestamp <= previous.timestamp:
            raise IngestError(
                f"Timestamps must strictly increase: {previous.timestamp} is followed "
                f"by {current.timestamp}."
            )


@dataclass(frozen=True)
class LogSchema:
    """Maps record fields to CSV column names.

    Track columns are discovered as repeated groups
    ``{track_prefix}{i}_{id,dx,dy,dvx,dvy}``.
    """

    timestamp: str = "timestamp"
    ax: str = "ax"
    ay: str = "ay"
    steer: str = "steer"
    brake: str = "brake"
    throttle: str = "throttle"
    vx: str = "vx"
    vy: str = "vy"
    lane_lines: tuple[str, ...] = ("lane_0", "lane_1", "lane_2", "lane_3")
    track_prefix: str = "trk"
    cipv: str | None = "cipv_id"

    def column_for(self, name: str) -> str:
        column: str = getattr(self, name)
        return column

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> LogSchema:
        """Builds a schema from a JSON column map.

        Raises:
            LogSchemaError: If a required field is not mapped or a key is unknown
        """
        known = {
            "timestamp",
            "ax",
            "ay",
            "steer",
            "brake",
            "throttle",
            "vx",
            "vy",
            "lane_lines",
            "track_prefix",
            "cipv",
        }
        unknown = sorted(set(data) - known)
        if unknown:
            raise LogSchemaError(
                f"Unknown schema keys: {', '.join(unknown)}\n"
                f"Suggestion: valid keys are {', '.join(sorted(known))}"
            )
        missing = [name for name in REQUIRED_FIELDS if not data.get(name, name)]
        if missing:
            raise LogSchemaError(f"Schema leaves fields unmapped: {', '.join(missing)}")
        kwargs: dict[str, Any] = {k: v for k, v in data.items() if k != "lane_lines"}
        if "lane_lines" in data:
            kwargs["lane_lines"] = tuple(data["lane_lines"])
        return cls(**kwargs)

    def to_dict(self) -> dict[str, Any]:
        return {
            "timestamp": self.timestamp,
            "ax": self.ax,
            "ay": self.ay,
            "steer": self.steer,
            "brake": self.brake,
            "throttle": self.throttle,
            "vx": self.vx,
            "vy": self.vy,
            "lane_lines": list(self.lane_lines),
            "track_prefix": self.track_prefix,
            "cipv": self.cipv,
        }


@dataclass(frozen=True)
class ParsedLog:
    """Result of parsing a CSV log.

    Attributes:
        records: Valid records in file order
        skipped_rows: Number of malformed rows that were dropped
    """

    records: tuple[DriverLogRecord, ...]
    skipped_rows: int
